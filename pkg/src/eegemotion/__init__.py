"""EEG emotion classification from STFT spectrograms with a CNN-LSTM network.

Subpackages: ``signal_core`` (filtering, STFT), ``corpus`` (epoch sets,
labels, synthetic data), ``nn`` (layers, training), ``evaluation``
(repeated K-fold, metrics, Welch t-test) and ``cli``.
"""

__version__ = "0.1.0"
