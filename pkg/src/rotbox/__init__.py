"""Toolkit for oriented-box detection geometry and evaluation."""

from .errors import (
    AnnotationParseError,
    ContractViolationError,
    InvalidArgumentError,
    InvalidBoxError,
    InvalidQuadError,
    RotboxError,
    ShapeError,
    TrainingDivergedError,
)
from .encoding import (
    OffsetVector,
    decode,
    decode_batch,
    encode,
    encode_batch,
    encode_horizontal,
    enlarge_context,
    lift_aligned,
)
from .geometry import (
    EMPTY_POLYGON,
    AlignedBox,
    ConvexPolygon,
    OrientedBox,
    aligned_hull,
    box_from_quad,
    boxes_from_array,
    boxes_to_array,
    canonicalize,
    clip_convex,
    corners_of,
    iou_aligned,
    iou_matrix,
    iou_oriented,
    polygon_area,
)
from .roi_align import (
    FeatureTensor,
    PooledFeature,
    bilinear_sample,
    roi_align,
    rps_roi_align,
    transform_point,
)
from .assigner import (
    Assignment,
    assign_horizontal,
    assign_rotated,
    build_targets,
)
from .nms import Detection, rotated_nms, score_filter
from .learner import (
    LinearRegressor,
    TrainConfig,
    TrainResult,
    load_model,
    predict,
    save_model,
    smooth_l1,
    train,
)
from .synthetic import (
    SceneConfig,
    SyntheticScene,
    TrainingSet,
    anchor_normalize,
    generate_scene,
    pool_features,
    render_scene,
    synthesize_training_set,
)
from .dota import (
    AnnotatedObject,
    TileWindow,
    parse_annotations,
    parse_detections,
    rotate_annotations_90k,
    scale_annotations,
    tile_windows,
    transfer_annotations,
    write_detections,
)
from .evaluation import (
    GroundTruth,
    PRCurve,
    average_precision,
    evaluate,
    format_report,
    match_detections,
    mean_ap,
)
from .pipeline import (
    DemoArtifacts,
    PipelineConfig,
    load_config,
    run_demo,
    save_config,
)

__version__ = "0.1.0"
