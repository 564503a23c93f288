"""Reversible histogram-shift data hiding that commutes with block-permutation
image encryption: embed in the plain or encrypted domain, extract and decrypt
in either order, recover payload and image exactly."""

from .analysis import (
    CodecSpec,
    CompressionResult,
    CorrelationReport,
    capacity_report,
    compression_eval,
    correlation,
    correlation_report,
    load_codec_config,
    mse,
    psnr,
    resize_topleft,
)
from .cipher import (
    KeySet,
    KeyedBitStream,
    generate_keys,
    load_key_file,
    plane_key,
    rotate_flip_blocks,
    save_key_file,
    scramble_blocks,
    unrotate_blocks,
    unscramble_blocks,
)
from .errors import (
    BlockmarkError,
    CapacityExceededError,
    CodecError,
    DegenerateSampleError,
    GeometryError,
    ImageFormatError,
    KeyFormatError,
    LossyCodecError,
    NoZeroPointError,
    SideInfoError,
)
from .histshift import (
    HistPair,
    capacity,
    embed_bits,
    extract_bits,
    find_pp_zp,
    histogram,
    marked_mask,
    shift_histogram,
    unshift_histogram,
)
from .image_io import (
    BlockGrid,
    Image,
    block_stack,
    concat_blocks,
    decode_image,
    encode_image,
    get_block,
    load_image,
    save_image,
    split_blocks,
    stack_to_plane,
)
from .ordering import (
    BlockKey,
    OrderPlan,
    WithinOrder,
    among_block_order,
    apply_orientation,
    build_order_plan,
    canonical_orientation,
    invert_orientation,
    pp_signature,
    visiting_order,
)
from .pipeline import (
    Mode,
    RegionMap,
    SideInfo,
    decrypt,
    embed_plain_then_encrypt,
    embed_two_domain,
    encrypt_then_embed,
    extract_payload,
    extract_two_domain,
)

__version__ = "0.1.0"
