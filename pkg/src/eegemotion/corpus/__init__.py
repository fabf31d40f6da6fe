from .features import (InstanceTensor, epoch_labels, feature_shape, featurize,
                       featurize_epochset, flatten, replicate_planes, truncate)
from .labels import LabelScheme, label_va4, label_valence3
from .records import DEAP, DENS, GEOMETRIES, SEED, EpochRecord, EpochSet, Geometry, Ratings, get_geometry
from .storage import EpochSetFormatError, read_epochset, write_epochset
from .synth import SynthConfig, class_frequencies, pink_noise, scheme_for_classes, synth_generate

__all__ = [
    "DEAP", "DENS", "GEOMETRIES", "SEED", "EpochRecord", "EpochSet", "EpochSetFormatError",
    "Geometry", "InstanceTensor", "LabelScheme", "Ratings", "SynthConfig", "class_frequencies",
    "epoch_labels", "feature_shape", "featurize", "featurize_epochset", "flatten",
    "get_geometry", "label_va4", "label_valence3", "pink_noise", "read_epochset",
    "replicate_planes", "scheme_for_classes", "synth_generate", "truncate", "write_epochset",
]
