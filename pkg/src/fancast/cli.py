"""Command line front door.

Every subcommand is a thin client over the HTTP service: it builds a
request, posts it to the API, and renders the response. By default the
app is driven in-process, so single-shot runs stay deterministic and
need no running server; --server points at a remote instance instead.

Exit codes: 0 success, 1 validation findings, 2 input errors,
3 internal errors.
"""

from __future__ import annotations

import argparse
import sys

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class _Client:
    def __init__(self, server: str | None):
        if server is None:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app, raise_server_exceptions=False)
        else:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)

    def post(self, path: str, payload: dict) -> object:
        return self._client.post(path, json=payload)


def _detail_message(response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        return response.text
    if isinstance(detail, dict):
        kind = detail.get("type", "error")
        return f"{kind}: {detail.get('message', '')}"
    return str(detail)


def _call(args, path: str, payload: dict) -> dict:
    client = _Client(args.server)
    try:
        response = client.post(path, payload)
    except Exception as exc:  # connection refused, bad URL, ...
        print(f"request failed: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INTERNAL)
    if response.status_code >= 500:
        print(f"internal error: {_detail_message(response)}", file=sys.stderr)
        raise SystemExit(EXIT_INTERNAL)
    if response.status_code >= 400:
        print(_detail_message(response), file=sys.stderr)
        raise SystemExit(EXIT_INPUT)
    return response.json()


def _num(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_files(files: dict) -> None:
    for name in sorted(files):
        print(f"wrote {files[name]}")


def _corpus_payload(args) -> dict:
    return {
        "graph_path": args.graph,
        "stories_path": args.stories,
        "votes_path": args.votes,
    }


# ---- subcommands ----


def cmd_ingest(args) -> int:
    payload = _corpus_payload(args)
    payload["promotion_threshold"] = args.promotion_threshold
    data = _call(args, "/ingest", payload)
    print(
        f"stories: {data['n_stories']}  users: {data['n_users']}"
        f"  edges: {data['n_edges']}  votes: {data['total_votes']}"
    )
    for violation in data["violations"]:
        print(
            f"{violation['severity']} {violation['story_id']}"
            f" {violation['rule']}: {violation['message']}"
        )
    print(f"{len(data['violations'])} violations")
    return EXIT_FINDINGS if data["violations"] else EXIT_OK


def cmd_metrics(args) -> int:
    payload = _corpus_payload(args)
    payload.update(
        out_dir=args.out,
        k_values=args.k or [10],
        convention=args.convention,
        permutations=args.permutations,
        seed=args.seed,
    )
    data = _call(args, "/metrics", payload)
    _print_files(data["files"])
    for row in data["summary"]:
        print(
            f"k={row['k']} {row['convention']} n={row['n_stories']}"
            f" share_half_in_network={_num(row['share_half_in_network'])}"
            f" spearman_rho={_num(row['spearman_rho'])} p={_num(row['spearman_p'])}"
        )
    return EXIT_OK


def cmd_train(args) -> int:
    payload = _corpus_payload(args)
    payload.update(
        out_dir=args.out,
        threshold=args.threshold,
        convention=args.convention,
        min_leaf=args.min_leaf,
        max_depth=args.max_depth,
        use_gain_ratio=not args.plain_gain,
        folds=args.folds,
        seed=args.seed,
    )
    data = _call(args, "/train", payload)
    print(f"examples: {data['n_examples']} ({data['n_interesting']} interesting)")
    print(f"tree: depth {data['depth']}, {data['n_leaves']} leaves -> {data['tree_path']}")
    ev = data["training_eval"]
    print(f"training accuracy {_num(ev['accuracy'])} precision {_num(ev['precision'])}")
    cv = data["cross_validation"]
    if cv is not None:
        print(
            f"cross-validation ({cv['folds']} folds, seed {cv['seed']}):"
            f" accuracy {_num(cv['accuracy'])} precision {_num(cv['precision'])}"
        )
    print(f"manifest: {data['manifest_path']}")
    return EXIT_OK


def cmd_predict(args) -> int:
    payload = _corpus_payload(args)
    payload.update(tree_path=args.tree, out_dir=args.out, convention=args.convention)
    data = _call(args, "/predict", payload)
    print(
        f"{data['n_examples']} stories, {data['n_predicted_interesting']}"
        f" predicted interesting -> {data['predictions_path']}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    payload = _corpus_payload(args)
    payload.update(
        tree_path=args.tree,
        out_dir=args.out,
        threshold=args.threshold,
        convention=args.convention,
    )
    data = _call(args, "/eval", payload)
    report = data["report"]
    print(
        f"tp={report['tp']} tn={report['tn']} fp={report['fp']} fn={report['fn']}"
        f" accuracy={_num(report['accuracy'])} precision={_num(report['precision'])}"
    )
    baseline = data["baseline"]
    if baseline is not None:
        verdict = "beats" if baseline["predictor_beats_baseline"] else "does not beat"
        print(
            f"baseline: {baseline['n_promoted_interesting']}/{baseline['n_promoted']}"
            f" promoted interesting, precision {_num(baseline['baseline_precision'])};"
            f" predictor {verdict} baseline"
        )
    print(f"wrote {data['eval_path']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    payload = {"out_dir": args.out, "seed": args.seed, "config_path": args.config}
    data = _call(args, "/simulate", payload)
    _print_files(data["files"])
    print(
        f"{data['n_stories']} stories ({data['n_promoted']} promoted,"
        f" {data['attempts']} attempts)"
    )
    print(f"manifest: {data['manifest_path']}")
    return EXIT_OK


def cmd_report(args) -> int:
    payload = _corpus_payload(args)
    payload.update(
        out_dir=args.out,
        traces_path=args.traces,
        k=args.k,
        convention=args.convention,
        permutations=args.permutations,
        seed=args.seed,
        post_window_ticks=args.post_window_ticks,
        promotion_threshold=args.promotion_threshold,
        promotion_window_ticks=args.promotion_window_ticks,
    )
    data = _call(args, "/report", payload)
    _print_files(data["files"])
    print(f"time series written for {data['n_timeseries_stories']} stories")
    promotion = data["promotion"]
    if promotion is not None:
        print(
            f"promotion: {promotion['n_promoted_in_traces']} stories,"
            f" median pre rate {_num(promotion['median_pre_rate'])}/tick,"
            f" median post rate {_num(promotion['median_post_rate'])}/tick,"
            f" ratio {_num(promotion['rate_ratio'])}"
        )
    decay = data["decay"]
    if decay is not None:
        print(
            f"front-page decay: half-life {_num(decay['half_life_ticks'])} ticks"
            f" over {decay['n_points']} bins"
        )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ---- parser ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fancast",
        description="Social voting analysis: ingest corpora, compute cascade metrics, "
        "train an interest predictor, simulate vote spread, emit report tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=None, help="base URL of a running service (default: in-process)")

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("--graph", required=True, help="edge list path (fan<TAB>watched)")
    corpus.add_argument("--stories", required=True, help="stories JSONL path")
    corpus.add_argument("--votes", required=True, help="votes CSV path")

    convention = argparse.ArgumentParser(add_help=False)
    convention.add_argument(
        "--convention",
        default="exclude_submitter",
        choices=["exclude_submitter", "include_submitter"],
        help="whether the prefix of the first k votes counts the submitter",
    )

    p = sub.add_parser("ingest", parents=[common, corpus], help="load and validate a corpus")
    p.add_argument("--promotion-threshold", type=int, default=43)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("metrics", parents=[common, corpus, convention], help="cascade metric tables")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=int, action="append", help="prefix size, repeatable (default 10)")
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="permutation-test seed")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("train", parents=[common, corpus, convention], help="train the interest predictor")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=int, default=520, help="final votes needed to label a story interesting")
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--plain-gain", action="store_true", help="split on information gain instead of gain ratio")
    p.add_argument("--folds", type=int, default=None, help="stratified cross-validation fold count")
    p.add_argument("--seed", type=int, default=None, help="cross-validation shuffle seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common, corpus, convention], help="apply a trained tree")
    p.add_argument("--tree", required=True, help="tree JSON path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", parents=[common, corpus, convention], help="score a tree against labels")
    p.add_argument("--tree", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=int, default=520)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True, help="simulation seed (required)")
    p.add_argument("--config", default=None, help="config file overriding defaults")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common, corpus, convention], help="plot-ready data tables")
    p.add_argument("--out", required=True)
    p.add_argument("--traces", default=None, help="vote traces JSONL for promotion-rate tables")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--post-window-ticks", type=int, default=144)
    p.add_argument("--promotion-window-ticks", type=int, default=144)
    p.add_argument("--promotion-threshold", type=int, default=43)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", parents=[], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "train" and args.folds is not None and args.seed is None:
            parser.error("--folds requires --seed")
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
