"""
(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from sed_detect.utilities.annotation import (
    DEFAULT_MERGE_GAP_S,
    AnnotationStats,
    AnnotationTrack,
    AnnotatorCounts,
    FrameLabels,
    KappaReport,
    annotation_stats,
    cohen_kappa,
    corpus_kappa,
    frame_labels,
    merge_short_gaps,
    track_frame_labels,
)
from sed_detect.utilities.corpus import (
    MANIFEST_NAME,
    Corpus,
    Interaction,
    PreparedInteraction,
    iter_stream_file,
    load_corpus,
    load_interaction,
    load_manifest,
    manifest_path,
    prepare_frames,
    prepare_interaction,
    read_annotation_file,
    read_stream_file,
    sample_record,
    track_labels,
    write_annotation_file,
    write_manifest,
    write_stream_file,
)
from sed_detect.utilities.detector import (
    Decision,
    DetectorState,
    StreamingDetector,
    batch_decisions,
    decision_header,
    detect_stream,
    make_decision,
)
from sed_detect.utilities.experiment import (
    CONTRAST_COLUMNS,
    SWEEP_COLUMNS,
    SWEEP_ETAS,
    SWEEP_METRICS,
    SWEEP_TAUS,
    CellSummary,
    FoldResult,
    comparison_table,
    contrast_table,
    cross_validate,
    evaluate_model,
    fit_preprocessing,
    interaction_windows,
    model_scores,
    model_windows,
    preprocess_interactions,
    select,
    sweep,
    sweep_grid,
    sweep_table,
    train_model,
    write_confusion_csv,
    write_contrast_csv,
    write_roc_csv,
    write_sweep_csv,
)
from sed_detect.utilities.logreg import (
    logreg_objective,
    logreg_predict,
    logreg_train,
)
from sed_detect.utilities.metrics import (
    DECISION_THRESHOLD,
    NOT_SIGNIFICANT,
    UNDEFINED,
    BehaviorState,
    ConfusionMatrix,
    ContrastRow,
    EvalReport,
    auc,
    balanced_resample_eval,
    behavior_contrast,
    predict_labels,
    resample_partitions,
    roc_points,
    significance_stars,
    welch_test,
)
from sed_detect.utilities.networks import (
    DEFAULT_HIDDEN_SIZES,
    LSTM_FORGET_BIAS,
    CellParams,
    DropoutMasks,
    GruStep,
    LstmStep,
    NetworkSpec,
    cell_params,
    check_params,
    dropout_masks,
    gru_cell_forward,
    init_params,
    loss_and_grads,
    lstm_cell_forward,
    network_forward,
    recurrent_layer_backward,
    recurrent_layer_forward,
    weighted_cross_entropy,
)
from sed_detect.utilities.streams import (
    DEGENERATE_SD,
    FrameSequence,
    ImputationModel,
    IntegratedStream,
    NormalizationModel,
    PooledWindow,
    StreamSample,
    StreamSeries,
    align_streams,
    apply_imputer,
    apply_normalizer,
    assemble_row,
    fit_imputer,
    fit_normalizer,
    frame_count,
    frame_sequence,
    integrate_stream,
    pool_window,
    window_bounds,
)
from sed_detect.utilities.synthesis import (
    FEASIBLE_RATIO,
    FINAL_CAUSE,
    SECOND_ANNOTATOR,
    TRUTH_ANNOTATOR,
    SyntheticInteraction,
    SyntheticTimeline,
    check_config,
    check_timeline,
    cue_intensity,
    draw_duration,
    emit,
    generate_corpus,
    generate_interaction,
    generate_interactions,
    generate_timeline,
    generate_timelines,
    interaction_ids,
    interaction_seed,
    sample_times,
    second_annotator,
    sed_timeline,
    state_at,
    stream_series,
    truth_track,
)
from sed_detect.utilities.training import (
    GRADIENT_CHECK_STEP,
    GRADIENT_CHECK_TOLERANCE,
    GradientReport,
    NetworkFit,
    RMSprop,
    TrainedModel,
    TrainingHistory,
    global_norm,
    gradient_check,
    load_model,
    monitor_score,
    numeric_gradient,
    predict_network,
    relative_error,
    save_model,
    split_validation,
    train_network,
)
from sed_detect.utilities.utilities import (
    cli_errors,
    configure_logging,
    data_path,
    decode_array,
    dumps,
    encode_array,
    is_record,
    load_config,
    load_file,
    make_dirs,
    package_version,
    read_jsonl,
    retrieve_catalog,
    retrieve_layout,
    write_json,
    write_jsonl,
    write_run_record,
)
from sed_detect.utilities.windowing import (
    DEFAULT_FOLDS,
    WINDOWS_SCHEMA,
    FoldPlan,
    LabeledWindow,
    build_windows,
    class_weights,
    dump_windows,
    load_windows,
    make_folds,
    stack_windows,
    window_count,
)


__all__ = [
    "AnnotationStats",
    "AnnotationTrack",
    "AnnotatorCounts",
    "BehaviorState",
    "CellParams",
    "CellSummary",
    "ConfusionMatrix",
    "CONTRAST_COLUMNS",
    "ContrastRow",
    "Corpus",
    "DECISION_THRESHOLD",
    "DEFAULT_FOLDS",
    "DEFAULT_HIDDEN_SIZES",
    "DEFAULT_MERGE_GAP_S",
    "DEGENERATE_SD",
    "Decision",
    "DetectorState",
    "DropoutMasks",
    "EvalReport",
    "FEASIBLE_RATIO",
    "FINAL_CAUSE",
    "FoldPlan",
    "FoldResult",
    "FrameLabels",
    "FrameSequence",
    "GRADIENT_CHECK_STEP",
    "GRADIENT_CHECK_TOLERANCE",
    "GradientReport",
    "GruStep",
    "ImputationModel",
    "IntegratedStream",
    "Interaction",
    "KappaReport",
    "LSTM_FORGET_BIAS",
    "LabeledWindow",
    "LstmStep",
    "MANIFEST_NAME",
    "NOT_SIGNIFICANT",
    "NetworkFit",
    "NetworkSpec",
    "NormalizationModel",
    "PooledWindow",
    "PreparedInteraction",
    "RMSprop",
    "SECOND_ANNOTATOR",
    "SWEEP_COLUMNS",
    "SWEEP_ETAS",
    "SWEEP_METRICS",
    "SWEEP_TAUS",
    "StreamSample",
    "StreamSeries",
    "StreamingDetector",
    "SyntheticInteraction",
    "SyntheticTimeline",
    "TRUTH_ANNOTATOR",
    "TrainedModel",
    "TrainingHistory",
    "UNDEFINED",
    "WINDOWS_SCHEMA",
    "align_streams",
    "annotation_stats",
    "apply_imputer",
    "apply_normalizer",
    "assemble_row",
    "auc",
    "balanced_resample_eval",
    "batch_decisions",
    "behavior_contrast",
    "build_windows",
    "cell_params",
    "check_config",
    "check_timeline",
    "check_params",
    "class_weights",
    "cli_errors",
    "cohen_kappa",
    "comparison_table",
    "contrast_table",
    "configure_logging",
    "corpus_kappa",
    "cross_validate",
    "cue_intensity",
    "data_path",
    "decision_header",
    "decode_array",
    "detect_stream",
    "draw_duration",
    "dropout_masks",
    "dump_windows",
    "dumps",
    "emit",
    "encode_array",
    "evaluate_model",
    "fit_imputer",
    "fit_normalizer",
    "fit_preprocessing",
    "frame_count",
    "frame_labels",
    "frame_sequence",
    "generate_corpus",
    "generate_interaction",
    "generate_interactions",
    "generate_timeline",
    "generate_timelines",
    "global_norm",
    "gradient_check",
    "gru_cell_forward",
    "init_params",
    "integrate_stream",
    "interaction_ids",
    "interaction_seed",
    "interaction_windows",
    "is_record",
    "iter_stream_file",
    "load_corpus",
    "load_config",
    "load_file",
    "load_interaction",
    "load_manifest",
    "load_model",
    "load_windows",
    "logreg_objective",
    "logreg_predict",
    "logreg_train",
    "loss_and_grads",
    "lstm_cell_forward",
    "make_decision",
    "make_dirs",
    "make_folds",
    "manifest_path",
    "merge_short_gaps",
    "model_scores",
    "model_windows",
    "monitor_score",
    "network_forward",
    "numeric_gradient",
    "package_version",
    "pool_window",
    "predict_labels",
    "predict_network",
    "prepare_frames",
    "prepare_interaction",
    "preprocess_interactions",
    "read_annotation_file",
    "read_jsonl",
    "read_stream_file",
    "recurrent_layer_backward",
    "recurrent_layer_forward",
    "relative_error",
    "resample_partitions",
    "retrieve_catalog",
    "retrieve_layout",
    "roc_points",
    "sample_record",
    "sample_times",
    "save_model",
    "second_annotator",
    "sed_timeline",
    "select",
    "significance_stars",
    "split_validation",
    "stack_windows",
    "state_at",
    "stream_series",
    "sweep",
    "sweep_grid",
    "sweep_table",
    "track_frame_labels",
    "track_labels",
    "train_model",
    "train_network",
    "truth_track",
    "weighted_cross_entropy",
    "welch_test",
    "window_bounds",
    "window_count",
    "write_annotation_file",
    "write_confusion_csv",
    "write_contrast_csv",
    "write_json",
    "write_jsonl",
    "write_manifest",
    "write_roc_csv",
    "write_run_record",
    "write_stream_file",
    "write_sweep_csv",
]
