"""Embedding-alignment adversarial attacks against pluggable encoders,
with evaluation metrics, input-transformation defenses and a sweep CLI."""

__version__ = "0.1.0"

from .attack import (  # noqa: F401
    AttackConfig,
    AttackTrace,
    adm_loss_and_grad,
    pgd_step,
    run_attack,
)
from .encoders import (  # noqa: F401
    Encoder,
    IdentitySpec,
    PatchConvSpec,
    RandomProjectionSpec,
    TextEncoder,
    embed,
    embed_text,
    embed_vjp,
    make_encoder,
)
from .evaluation import alignment, asr, build_sweep_report, zero_shot_classify  # noqa: F401
from .media import (  # noqa: F401
    MediaTensor,
    audio,
    clamp_to_range,
    image,
    load_audio,
    load_image,
    load_media,
    save_audio,
    save_image,
    save_media,
)
from .transforms import (  # noqa: F401
    FileBasedProvider,
    ProceduralProvider,
    TargetedInput,
    label_prototypes,
    transform_target,
)
