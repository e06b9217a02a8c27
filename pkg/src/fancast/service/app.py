"""FastAPI service wrapping the core package.

One endpoint per pipeline stage; each reads inputs from server-local
paths, writes its output set plus a RunManifest, and returns a summary.
Input problems map to 400 with a structured detail body; anything
unexpected stays a 500.
"""

from __future__ import annotations

import dataclasses
import os
import statistics

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..cascade import PrefixConvention, cascade_histograms, interestingness_profile, spearman_permutation
from ..corpus import corpus_stats, load_corpus, validate
from ..errors import (
    DataError,
    InputError,
    NoPromotedStoriesError,
    ParseError,
)
from ..graph import load_graph
from ..manifest import RunManifest
from ..predictor import (
    TrainParams,
    baseline_compare,
    cross_validate,
    evaluate,
    extract_features,
    train_tree,
    tree_from_json,
    tree_to_json,
    tree_to_text,
)
from ..reports import (
    fit_front_decay,
    promotion_rates,
    write_cascade_profiles,
    write_cascade_summary,
    write_corpus_summary,
    write_count_histogram,
    write_eval_report,
    write_interestingness_profile,
    write_predictions,
    write_promotion_rates,
    write_timeseries,
    write_user_activity,
    write_vote_histogram,
)
from ..simulate import SimulationConfig, load_config, read_traces, simulate_corpus, write_simulation
from . import schemas

app = FastAPI(title="fancast", version=__version__)


@app.exception_handler(InputError)
async def _input_error(_request: Request, exc: InputError) -> JSONResponse:
    detail = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        detail["line"] = exc.line
        detail["path"] = exc.path
    return JSONResponse(status_code=400, content={"detail": detail})


@app.exception_handler(DataError)
async def _data_error(_request: Request, exc: DataError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": {"type": type(exc).__name__, "message": str(exc)}})


@app.exception_handler(FileNotFoundError)
async def _missing_file(_request: Request, exc: FileNotFoundError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": {"type": "FileNotFound", "message": str(exc), "path": exc.filename}},
    )


def _load(graph_path: str, stories_path: str, votes_path: str):
    graph = load_graph(graph_path)
    corpus = load_corpus(stories_path, votes_path, graph)
    return graph, corpus


def _convention(label: str) -> PrefixConvention:
    try:
        return PrefixConvention.from_label(label)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _eval_model(report) -> schemas.EvalModel:
    return schemas.EvalModel(
        tp=report.tp,
        tn=report.tn,
        fp=report.fp,
        fn=report.fn,
        accuracy=report.accuracy,
        precision=report.precision,
    )


@app.get("/health", response_model=schemas.HealthResponse)
async def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/ingest", response_model=schemas.IngestResponse)
async def ingest(request: schemas.IngestRequest) -> schemas.IngestResponse:
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    findings = validate(corpus, promotion_threshold=request.promotion_threshold)
    models = [
        schemas.ViolationModel(story_id=v.story_id, rule=v.rule, message=v.message, severity=v.severity)
        for v in findings
    ]
    return schemas.IngestResponse(
        n_stories=len(corpus),
        n_users=graph.n_users,
        n_edges=graph.n_edges,
        total_votes=sum(len(story.voters) for story in corpus),
        violations=models,
        n_errors=sum(1 for v in findings if v.severity == "error"),
        n_warnings=sum(1 for v in findings if v.severity == "warning"),
    )


@app.post("/metrics", response_model=schemas.MetricsResponse)
async def metrics(request: schemas.MetricsRequest) -> schemas.MetricsResponse:
    convention = _convention(request.convention)
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    os.makedirs(request.out_dir, exist_ok=True)
    manifest = RunManifest(
        command="metrics", parameters=request.model_dump(), seed=request.seed
    )
    manifest.add_input("graph", request.graph_path)
    manifest.add_input("stories", request.stories_path)
    manifest.add_input("votes", request.votes_path)
    digests = {name: entry["sha256"] for name, entry in manifest.inputs.items()}

    files: dict[str, str] = {}
    rows: list[schemas.MetricsSummaryRow] = []
    histograms = []
    spearman_by_k: dict[int, tuple[float, float]] = {}
    for k in request.k_values:
        hist = cascade_histograms(corpus, graph, k=k, convention=convention)
        histograms.append(hist)
        tag = f"k{k}_{convention.label}"
        profile_path = os.path.join(request.out_dir, f"profiles_{tag}.csv")
        write_cascade_profiles(hist.profiles, profile_path, digests=digests)
        files[f"profiles_{tag}"] = profile_path
        influence_path = os.path.join(request.out_dir, f"influence_hist_{tag}.csv")
        write_count_histogram(
            hist.influence_hist, influence_path, value_label="influence", k=k, convention=convention.label, digests=digests
        )
        files[f"influence_hist_{tag}"] = influence_path
        in_network_path = os.path.join(request.out_dir, f"in_network_hist_{tag}.csv")
        write_count_histogram(
            hist.in_network_hist, in_network_path, value_label="in_network", k=k, convention=convention.label, digests=digests
        )
        files[f"in_network_hist_{tag}"] = in_network_path

        rho = p_value = None
        try:
            result = spearman_permutation(
                [p.in_network_k for p in hist.profiles],
                [p.final_votes for p in hist.profiles],
                permutations=request.permutations,
                seed=request.seed,
            )
            rho, p_value = result.rho, result.p_value
            spearman_by_k[k] = (rho, p_value)
        except ValueError:
            pass  # too few stories or constant values; summary row stays blank
        rows.append(
            schemas.MetricsSummaryRow(
                k=k,
                convention=convention.label,
                n_stories=len(hist.profiles),
                share_half_in_network=hist.share_half_in_network,
                spearman_rho=rho,
                spearman_p=p_value,
            )
        )

    summary_path = os.path.join(request.out_dir, "summary.csv")
    write_cascade_summary(histograms, summary_path, digests=digests, spearman_by_k=spearman_by_k)
    files["summary"] = summary_path

    for name, path in files.items():
        manifest.add_output(name, path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)
    return schemas.MetricsResponse(
        out_dir=request.out_dir, files=files, summary=rows, manifest_path=manifest_path
    )


@app.post("/train", response_model=schemas.TrainResponse)
async def train(request: schemas.TrainRequest) -> schemas.TrainResponse:
    if request.folds is not None and request.seed is None:
        raise DataError("cross-validation requires an explicit seed")
    convention = _convention(request.convention)
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    examples = extract_features(corpus, graph, threshold=request.threshold, convention=convention)
    params = TrainParams(
        min_leaf=request.min_leaf, max_depth=request.max_depth, use_gain_ratio=request.use_gain_ratio
    )
    tree = train_tree(examples, params)
    os.makedirs(request.out_dir, exist_ok=True)
    tree_path = os.path.join(request.out_dir, "tree.json")
    with open(tree_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(tree_to_json(tree))
    tree_text_path = os.path.join(request.out_dir, "tree.txt")
    with open(tree_text_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(tree_to_text(tree))

    cv_model = None
    cross = None
    if request.folds is not None:
        cross = cross_validate(examples, folds=request.folds, seed=request.seed, params=params)
        cv_model = schemas.CrossValidationModel(
            folds=cross.n_folds,
            seed=cross.seed,
            accuracy=cross.aggregate.accuracy,
            precision=cross.aggregate.precision,
        )

    training_eval = evaluate(tree, examples)
    manifest = RunManifest(command="train", parameters=request.model_dump(), seed=request.seed)
    manifest.add_input("graph", request.graph_path)
    manifest.add_input("stories", request.stories_path)
    manifest.add_input("votes", request.votes_path)
    digests = {name: entry["sha256"] for name, entry in manifest.inputs.items()}
    eval_path = os.path.join(request.out_dir, "training_eval.csv")
    write_eval_report(training_eval, eval_path, digests=digests, cross_validation=cross)
    manifest.add_output("tree", tree_path)
    manifest.add_output("tree_text", tree_text_path)
    manifest.add_output("training_eval", eval_path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)

    return schemas.TrainResponse(
        tree_path=tree_path,
        tree_text_path=tree_text_path,
        n_examples=len(examples),
        n_interesting=sum(1 for example in examples if example.label),
        depth=tree.depth(),
        n_leaves=tree.n_leaves(),
        training_eval=_eval_model(training_eval),
        cross_validation=cv_model,
        manifest_path=manifest_path,
    )


def _read_tree(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return tree_from_json(handle.read())
        except (ValueError, KeyError) as exc:
            raise ParseError(f"bad tree file: {exc}", path=path) from None


@app.post("/predict", response_model=schemas.PredictResponse)
async def predict(request: schemas.PredictRequest) -> schemas.PredictResponse:
    convention = _convention(request.convention)
    tree = _read_tree(request.tree_path)
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    examples = extract_features(corpus, graph, convention=convention)
    predictions = [tree.predict(example.features) for example in examples]
    os.makedirs(request.out_dir, exist_ok=True)
    manifest = RunManifest(command="predict", parameters=request.model_dump())
    manifest.add_input("tree", request.tree_path)
    manifest.add_input("graph", request.graph_path)
    manifest.add_input("stories", request.stories_path)
    manifest.add_input("votes", request.votes_path)
    digests = {name: entry["sha256"] for name, entry in manifest.inputs.items()}
    predictions_path = os.path.join(request.out_dir, "predictions.csv")
    write_predictions(examples, predictions, predictions_path, digests=digests)
    manifest.add_output("predictions", predictions_path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)
    return schemas.PredictResponse(
        predictions_path=predictions_path,
        n_examples=len(examples),
        n_predicted_interesting=sum(predictions),
        manifest_path=manifest_path,
    )


@app.post("/eval", response_model=schemas.EvalResponse)
async def eval_endpoint(request: schemas.EvalRequest) -> schemas.EvalResponse:
    convention = _convention(request.convention)
    tree = _read_tree(request.tree_path)
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    examples = extract_features(corpus, graph, threshold=request.threshold, convention=convention)
    report = evaluate(tree, examples)
    baseline_model = None
    baseline = None
    try:
        baseline = baseline_compare(corpus, report, threshold=request.threshold)
        baseline_model = schemas.BaselineModel(
            n_promoted=baseline.n_promoted,
            n_promoted_interesting=baseline.n_promoted_interesting,
            baseline_precision=baseline.baseline_precision,
            predictor_precision=baseline.predictor_precision,
            predictor_beats_baseline=baseline.predictor_beats_baseline,
        )
    except NoPromotedStoriesError:
        pass  # baseline undefined without promoted stories; eval still stands
    os.makedirs(request.out_dir, exist_ok=True)
    manifest = RunManifest(command="eval", parameters=request.model_dump())
    manifest.add_input("tree", request.tree_path)
    manifest.add_input("graph", request.graph_path)
    manifest.add_input("stories", request.stories_path)
    manifest.add_input("votes", request.votes_path)
    digests = {name: entry["sha256"] for name, entry in manifest.inputs.items()}
    eval_path = os.path.join(request.out_dir, "eval.csv")
    write_eval_report(report, eval_path, digests=digests, baseline=baseline)
    manifest.add_output("eval", eval_path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)
    return schemas.EvalResponse(
        report=_eval_model(report),
        baseline=baseline_model,
        eval_path=eval_path,
        manifest_path=manifest_path,
    )


@app.post("/simulate", response_model=schemas.SimulateResponse)
async def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
    if request.config_path is not None:
        config = load_config(request.config_path)
    else:
        config = SimulationConfig()
    config = dataclasses.replace(config, seed=request.seed)
    result = simulate_corpus(config)
    files = write_simulation(result, request.out_dir)
    manifest = RunManifest(command="simulate", parameters=request.model_dump(), seed=request.seed)
    if request.config_path is not None:
        manifest.add_input("config", request.config_path)
    for name, path in files.items():
        manifest.add_output(name, path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)
    return schemas.SimulateResponse(
        out_dir=request.out_dir,
        files=files,
        n_stories=len(result.corpus),
        n_promoted=sum(1 for story in result.corpus if story.promoted),
        attempts=result.attempts,
        manifest_path=manifest_path,
    )


@app.post("/report", response_model=schemas.ReportResponse)
async def report(request: schemas.ReportRequest) -> schemas.ReportResponse:
    convention = _convention(request.convention)
    graph, corpus = _load(request.graph_path, request.stories_path, request.votes_path)
    stats = corpus_stats(corpus)
    os.makedirs(request.out_dir, exist_ok=True)
    manifest = RunManifest(command="report", parameters=request.model_dump(), seed=request.seed)
    manifest.add_input("graph", request.graph_path)
    manifest.add_input("stories", request.stories_path)
    manifest.add_input("votes", request.votes_path)
    if request.traces_path is not None:
        manifest.add_input("traces", request.traces_path)
    digests = {name: entry["sha256"] for name, entry in manifest.inputs.items()}

    files: dict[str, str] = {}

    def out(name: str, filename: str) -> str:
        path = os.path.join(request.out_dir, filename)
        files[name] = path
        return path

    write_vote_histogram(stats, out("vote_histogram", "vote_histogram.csv"), digests=digests)
    write_user_activity(stats, out("user_activity", "user_activity.csv"), digests=digests)
    write_corpus_summary(stats, out("summary", "report_summary.csv"), digests=digests)
    n_timeseries = write_timeseries(corpus, out("timeseries", "votes_timeseries.csv"), digests=digests)

    try:
        profile = interestingness_profile(
            corpus,
            graph,
            k=request.k,
            convention=convention,
            permutations=request.permutations,
            seed=request.seed,
        )
        write_interestingness_profile(
            profile, out("interestingness_profile", "interestingness_profile.csv"), digests=digests
        )
    except ValueError:
        pass  # under 3 stories or constant columns: no profile table

    promotion_model = None
    decay_model = None
    if request.traces_path is not None:
        traces = read_traces(request.traces_path)
        rates = promotion_rates(
            traces,
            post_window_ticks=request.post_window_ticks,
            promotion_threshold=request.promotion_threshold,
            promotion_window_ticks=request.promotion_window_ticks,
        )
        write_promotion_rates(rates, out("promotion_rates", "promotion_rates.csv"), digests=digests)
        if rates:
            pre = statistics.median(r.pre_rate for r in rates)
            post = statistics.median(r.post_rate for r in rates)
            promotion_model = schemas.PromotionSummaryModel(
                n_promoted_in_traces=len(rates),
                median_pre_rate=pre,
                median_post_rate=post,
                rate_ratio=post / pre if pre > 0 else None,
            )
        try:
            fit = fit_front_decay(
                traces,
                promotion_threshold=request.promotion_threshold,
                promotion_window_ticks=request.promotion_window_ticks,
            )
            decay_model = schemas.DecayFitModel(
                half_life_ticks=fit.half_life_ticks,
                slope=fit.slope,
                n_points=fit.n_points,
                delta_min=fit.delta_min,
                delta_max=fit.delta_max,
            )
        except ValueError:
            pass  # not enough front-page votes to fit a decay

    for name, path in files.items():
        manifest.add_output(name, path)
    manifest_path = os.path.join(request.out_dir, "manifest.json")
    manifest.write(manifest_path)
    return schemas.ReportResponse(
        out_dir=request.out_dir,
        files=files,
        n_timeseries_stories=n_timeseries,
        promotion=promotion_model,
        decay=decay_model,
        manifest_path=manifest_path,
    )
