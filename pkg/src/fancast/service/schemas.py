"""Request/response models for the analysis service.

All operations work on server-local file paths: the service is the
compute side of the toolkit and the CLI is a thin client that runs it
in-process by default, so "server-local" normally means the caller's
own filesystem.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorDetail(BaseModel):
    type: str
    message: str
    line: int | None = None
    path: str | None = None


class ViolationModel(BaseModel):
    story_id: str
    rule: str
    message: str
    severity: str


class IngestRequest(BaseModel):
    graph_path: str
    stories_path: str
    votes_path: str
    promotion_threshold: int = 43


class IngestResponse(BaseModel):
    n_stories: int
    n_users: int
    n_edges: int
    total_votes: int
    violations: list[ViolationModel]
    n_errors: int
    n_warnings: int


class MetricsRequest(BaseModel):
    graph_path: str
    stories_path: str
    votes_path: str
    out_dir: str
    k_values: list[int] = Field(default_factory=lambda: [10])
    convention: str = "exclude_submitter"
    permutations: int = 1000
    seed: int = 0


class MetricsSummaryRow(BaseModel):
    k: int
    convention: str
    n_stories: int
    share_half_in_network: float
    spearman_rho: float | None
    spearman_p: float | None


class MetricsResponse(BaseModel):
    out_dir: str
    files: dict[str, str]
    summary: list[MetricsSummaryRow]
    manifest_path: str


class TrainRequest(BaseModel):
    graph_path: str
    stories_path: str
    votes_path: str
    out_dir: str
    threshold: int = 520
    convention: str = "exclude_submitter"
    min_leaf: int = 1
    max_depth: int | None = None
    use_gain_ratio: bool = True
    folds: int | None = None
    seed: int | None = None


class EvalModel(BaseModel):
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float | None


class CrossValidationModel(BaseModel):
    folds: int
    seed: int
    accuracy: float
    precision: float | None


class TrainResponse(BaseModel):
    tree_path: str
    tree_text_path: str
    n_examples: int
    n_interesting: int
    depth: int
    n_leaves: int
    training_eval: EvalModel
    cross_validation: CrossValidationModel | None
    manifest_path: str


class PredictRequest(BaseModel):
    tree_path: str
    graph_path: str
    stories_path: str
    votes_path: str
    out_dir: str
    convention: str = "exclude_submitter"


class PredictResponse(BaseModel):
    predictions_path: str
    n_examples: int
    n_predicted_interesting: int
    manifest_path: str


class EvalRequest(BaseModel):
    tree_path: str
    graph_path: str
    stories_path: str
    votes_path: str
    out_dir: str
    threshold: int = 520
    convention: str = "exclude_submitter"


class BaselineModel(BaseModel):
    n_promoted: int
    n_promoted_interesting: int
    baseline_precision: float
    predictor_precision: float | None
    predictor_beats_baseline: bool


class EvalResponse(BaseModel):
    report: EvalModel
    baseline: BaselineModel | None
    eval_path: str
    manifest_path: str


class SimulateRequest(BaseModel):
    out_dir: str
    seed: int
    config_path: str | None = None


class SimulateResponse(BaseModel):
    out_dir: str
    files: dict[str, str]
    n_stories: int
    n_promoted: int
    attempts: int
    manifest_path: str


class ReportRequest(BaseModel):
    graph_path: str
    stories_path: str
    votes_path: str
    out_dir: str
    traces_path: str | None = None
    k: int = 10
    convention: str = "exclude_submitter"
    permutations: int = 1000
    seed: int = 0
    post_window_ticks: int = 144
    promotion_threshold: int = 43
    promotion_window_ticks: int = 144


class PromotionSummaryModel(BaseModel):
    n_promoted_in_traces: int
    median_pre_rate: float
    median_post_rate: float
    rate_ratio: float | None


class DecayFitModel(BaseModel):
    half_life_ticks: float
    slope: float
    n_points: int
    delta_min: int
    delta_max: int


class ReportResponse(BaseModel):
    out_dir: str
    files: dict[str, str]
    n_timeseries_stories: int
    promotion: PromotionSummaryModel | None
    decay: DecayFitModel | None
    manifest_path: str
