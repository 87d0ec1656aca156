from typing import NamedTuple

# --- Filter Kinds ---
(
    LOW_PASS,
    BAND_PASS,
) = ("low", "band")


class FilterSpec(NamedTuple):
    """One entry of the filter bank: A^scale for low-pass, Psi_scale for band-pass."""

    kind: str
    scale: int

    @property
    def label(self) -> str:
        return f"A^{self.scale}" if self.kind == LOW_PASS else f"Psi_{self.scale}"


DEFAULT_FILTERS = (
    FilterSpec(LOW_PASS, 1),
    FilterSpec(LOW_PASS, 2),
    FilterSpec(LOW_PASS, 3),
    FilterSpec(BAND_PASS, 1),
    FilterSpec(BAND_PASS, 2),
    FilterSpec(BAND_PASS, 3),
)

# --- Model Defaults ---
INPUT_DIM = 3
HIDDEN_DIM = 8
NUM_LAYERS = 2
MLP_DEPTH = 2
LEAKY_SLOPE = 0.2
FEATURE_COLUMNS = ("ecc", "cc", "logdeg")

# --- Loss Presets ---
DEFAULT_BETA = 1.0
BETA_PRESETS = {"default": DEFAULT_BETA, "quarter": 0.25}

# --- Training Defaults ---
LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PATIENCE = 20
VALIDATION_FRACTION = 0.15

# --- Decoder ---
# Expected clique size multiplier used for the default prefix length tau
TAU_MULTIPLIER = 4


class Preset(NamedTuple):
    generator: str
    groups: tuple  # (low, high) inclusive range for k, or fixed q for planted
    domain: tuple  # (low, high) inclusive range for d, or n for planted
    hardness: float  # removal fraction for rb, edge probability for planted
    kappa: int


# The hardness scalar of each class is mapped to (k, d, removal fraction) by this table.
# Sizes are drawn per instance so the node count spreads around the class mean.
PRESETS = {
    "small-easy": Preset("rb", (10, 14), (14, 18), 0.2, 1),
    "small-medium": Preset("rb", (10, 14), (14, 18), 0.5, 1),
    "small-hard": Preset("rb", (10, 14), (14, 18), 0.8, 10),
    "large-easy": Preset("rb", (36, 44), (30, 36), 0.2, 1),
    "large-medium": Preset("rb", (36, 44), (30, 36), 0.5, 1),
    "large-hard": Preset("rb", (36, 44), (30, 36), 0.8, 10),
    "tiny-hard": Preset("rb", (8, 8), (6, 6), 0.8, 10),
    "planted": Preset("planted", (8, 8), (50, 50), 0.2, 10),
}

# --- Reference Modes ---
(
    REFERENCE_EXACT,
    REFERENCE_PROVIDED,
    REFERENCE_AUTO,
) = ("exact", "provided", "auto")

# --- Method Labels ---
(
    METHOD_HYBRID,
    METHOD_LOW_PASS,
    METHOD_LOCAL_SEARCH,
    METHOD_EXACT,
) = ("hybrid", "low-pass", "local-search", "exact")
