from .als import EmbeddingModel, InteractionMatrix, train_user_embeddings
from .encoders import (
    CountryVocab,
    DemographicFeatures,
    DeviceFeatures,
    N_SP_FEATURES,
    SP_FEATURE_NAMES,
    assemble_sp_features,
    assemble_sp_features_batch,
    encode_device,
    encode_device_batch,
    encode_demographics,
)
from .matrixio import (
    read_matrix,
    read_matrix_archive,
    write_matrix,
    write_matrix_archive,
)
from .mel import MelParams, MelSpectrogram, mel_filterbank, mel_spectrogram

__all__ = [
    "CountryVocab",
    "DemographicFeatures",
    "DeviceFeatures",
    "EmbeddingModel",
    "InteractionMatrix",
    "MelParams",
    "MelSpectrogram",
    "N_SP_FEATURES",
    "SP_FEATURE_NAMES",
    "assemble_sp_features",
    "assemble_sp_features_batch",
    "encode_device",
    "encode_device_batch",
    "encode_demographics",
    "mel_filterbank",
    "mel_spectrogram",
    "read_matrix",
    "read_matrix_archive",
    "train_user_embeddings",
    "write_matrix",
    "write_matrix_archive",
]
