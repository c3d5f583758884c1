"""``awkernel`` command line: synth, embed, eval, oracle-check, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 property-check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import checks
from . import config as C
from . import walks as W
from .classify import cross_validate, node_classification_eval
from .featuremaps import GSKN, EmbeddingMatrix, extract_walks, stack_layers
from .graph import DatasetError, GraphCollection, disjoint_union, load_tu_dataset, \
    with_degree_attributes, write_tu_dataset
from .synth import GenerationError, SynthSpec, generate

log = logging.getLogger("awkernel")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


BRANCH_ALIASES = {"aw-only": "aw", "walk-only": "walk", "rw": "walk"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--dataset", help="TUDataset-format directory")
    p.add_argument("--synth", help="synthetic collection instead of --dataset")
    p.add_argument("--branch", choices=["walk", "aw", "both", *BRANCH_ALIASES])
    p.add_argument("--l-aw", dest="l_aw", type=int)
    p.add_argument("--l-rw", dest="l_rw", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=int, help="landmarks per branch")
    p.add_argument("--alpha", type=float)
    p.add_argument("--layers", type=int)
    p.add_argument("--aw-mode", dest="aw_mode", choices=["sample", "enumerate", "auto"])
    p.add_argument("--walk-mode", dest="walk_mode", choices=["sample", "enumerate", "auto"])
    p.add_argument("--max-degree", dest="max_degree", type=int,
                   help="cap of the degree one-hot attributes (default: observed maximum)")
    p.add_argument("--degree-attributes", dest="degree_attributes", choices=["auto", "on", "off"])
    p.add_argument("--task", choices=["graph", "node"])
    p.add_argument("--ablate", choices=[*C.ABLATIONS, "all"])
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="awkernel", description="Anonymous-walk and random-walk graph kernels.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("synth", help="write a synthetic collection in TUDataset format")
    s.add_argument("--family", required=True,
                   help="structure, regular, rings, or a basic family (cycle, wheel, path, ladder)")
    s.add_argument("--sizes", help="comma-separated size parameters")
    s.add_argument("--noise", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--name")

    e = sub.add_parser("embed", help="fit landmarks and write graph embeddings")
    _common(e)
    e.add_argument("--nodes", action="store_true", help="also write per-node embeddings")

    v = sub.add_parser("eval", help="cross-validated graph or node classification")
    _common(v)
    v.add_argument("--classifier", choices=list(C.CLASSIFIERS))
    v.add_argument("--reg", type=float, help="fixed regularization (default: inner CV)")
    v.add_argument("--folds", type=int)
    v.add_argument("--train-fraction", dest="train_fraction", type=float)
    v.add_argument("--runs", type=int)

    o = sub.add_parser("oracle-check", help="run the exactness and invariance property suites")
    o.add_argument("--out")
    o.add_argument("--quick", action="store_true", help="smaller suites")
    o.add_argument("-v", "--verbose", action="store_true")

    b = sub.add_parser("bench", help="per-phase timings and an AW-length sweep")
    _common(b)
    b.add_argument("--lengths", default="4,5,6,7,8", help="AW lengths for the timing sweep")
    return p


# --- configuration -------------------------------------------------------------

def run_config(args) -> C.RunConfig:
    cfg = C.load(args.config) if getattr(args, "config", None) else C.RunConfig()
    over = {k: getattr(args, k, None) for k in (
        "seed", "out", "threads", "dataset", "synth", "l_aw", "l_rw", "m", "alpha", "layers",
        "aw_mode", "walk_mode", "max_degree", "degree_attributes", "task", "classifier",
        "reg", "folds", "train_fraction", "runs")}
    branch = getattr(args, "branch", None)
    over["branch"] = BRANCH_ALIASES.get(branch, branch)
    ablate = getattr(args, "ablate", None)
    over["ablate"] = None if ablate == "all" else ablate
    q = getattr(args, "q", None)
    over["q_aw"] = over["q_walk"] = q
    if getattr(args, "nodes", False):
        over["node_embeddings"] = True
    if over["seed"] is not None:
        over["cv_seed"] = over["seed"]
    cfg = C.override(cfg, **over)
    return cfg.validate()


def load_collection(cfg: C.RunConfig) -> GraphCollection:
    if cfg.synth:
        fam, _, sizes = cfg.synth.partition(":")
        spec = SynthSpec(fam, tuple(int(s) for s in sizes.split(",") if s),
                         None if math.isnan(cfg.synth_noise) else cfg.synth_noise,
                         cfg.synth_seed)
        try:
            coll = generate(spec)
        except ValueError as e:
            raise UsageError(str(e)) from None
    elif cfg.dataset:
        coll = load_tu_dataset(cfg.dataset)
    else:
        raise UsageError("no data: give --dataset DIR or --synth FAMILY")
    if cfg.use_degree_attributes(coll.attribute_kind):
        coll = with_degree_attributes(coll, cfg.degree_cap())
    return coll


def snapshot(cfg: C.RunConfig) -> dict:
    return {"config": cfg.to_dict(), "config_text": C.dumps(cfg)}


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- commands ----------------------------------------------------------------------

def cmd_synth(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes else ()
    try:
        coll = generate(SynthSpec(args.family, sizes, args.noise, args.seed))
    except ValueError as e:
        raise UsageError(str(e)) from None
    name = args.name or coll.name or args.family
    write_tu_dataset(coll, args.out, name)
    cfg = C.RunConfig(synth=args.family, synth_seed=args.seed,
                      synth_noise=math.nan if args.noise is None else args.noise, out=args.out)
    _write(os.path.join(args.out, "run.cfg"), C.dumps(cfg))
    print(f"wrote {len(coll)} graphs ({coll.class_count} classes) to {args.out}/{name}_*.txt")
    return EXIT_OK


def cmd_embed(args) -> int:
    cfg = run_config(args)
    coll = load_collection(cfg)
    ec = cfg.embed_config()
    t0 = time.perf_counter()
    walks = extract_walks(coll.graphs, ec)
    model = GSKN(ec).fit(coll.graphs, walks)
    model.fit_meta["landmark_pool"] = "all graphs"
    rows = model.embed_graphs(coll.graphs, walks)
    meta = snapshot(cfg)
    meta.update({"branch_dims": model.branch_dims, "landmark_pool": "all graphs"})
    os.makedirs(cfg.out, exist_ok=True)
    EmbeddingMatrix(rows, list(range(len(coll))), model.branch_dims, meta).to_csv(
        os.path.join(cfg.out, "embeddings.csv"))
    model.fit_meta["run_config"] = C.dumps(cfg)
    model.save(os.path.join(cfg.out, "model.npz"))
    if cfg.node_embeddings:
        with open(os.path.join(cfg.out, "node_embeddings.csv"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            fh.write(",".join(["graph_id", "node_id"] + [f"d{j}" for j in range(rows.shape[1])]) + "\n")
            for gi, e in enumerate(model.transform(coll.graphs, walks)):
                for u, row in enumerate(e):
                    fh.write(",".join([str(gi), str(u)] + ["%.9g" % v for v in row]) + "\n")
    print(f"embedded {rows.shape[0]} graphs -> {rows.shape[0]} x {rows.shape[1]} "
          f"({', '.join(f'{b}={d}' for b, d in model.branch_dims.items())}) in {cfg.out} "
          f"[{time.perf_counter() - t0:.1f}s]")
    return EXIT_OK


def _eval_graph(cfg: C.RunConfig, coll: GraphCollection):
    reg = cfg.reg if cfg.reg > 0 else None
    return cross_validate(coll, cfg.embed_config(), cfg.folds, cfg.cv_seed, cfg.classifier, reg)


def _eval_node(cfg: C.RunConfig, coll: GraphCollection):
    g = coll.graphs[0] if len(coll) == 1 else disjoint_union(*coll.graphs)
    if "node_labels" not in g.meta:
        raise DatasetError("node task needs node labels (NAME_node_labels.txt)")
    if coll.attribute_kind == "categorical-one-hot":
        # the one-hot attributes are the targets themselves
        g = with_degree_attributes(GraphCollection([g], 1), cfg.degree_cap()).graphs[0]
    emb = stack_layers(g, cfg.embed_config())
    return node_classification_eval(g, emb.rows, cfg.train_fraction, cfg.cv_seed, cfg.runs,
                                    kind=cfg.classifier)


def cmd_eval(args) -> int:
    base = run_config(args)
    variants = list(C.ABLATIONS) if getattr(args, "ablate", None) == "all" else [base.ablate]
    os.makedirs(base.out, exist_ok=True)
    summary = []
    for ab in variants:
        cfg = C.override(base, ablate=ab) if ab else base
        coll = load_collection(cfg)
        t0 = time.perf_counter()
        report = _eval_node(cfg, coll) if cfg.task == "node" else _eval_graph(cfg, coll)
        secs = time.perf_counter() - t0
        report.config.update(snapshot(cfg))
        tag = f"_{ab}" if ab and len(variants) > 1 else ""
        _write(os.path.join(cfg.out, f"report{tag}.txt"), report.to_table() + "\n")
        _write(os.path.join(cfg.out, f"report{tag}.jsonl"), report.to_records())
        label = ab or cfg.effective_branch()
        summary.append(f"{label:<10} {100 * report.mean:6.2f} +- {100 * report.std:5.2f}  "
                       f"macro-F1 {report.macro_f1:.4f}  micro-F1 {report.micro_f1:.4f}  "
                       f"({secs:.1f}s)")
        print(report.to_table())
    if len(variants) > 1:
        print("\n".join(summary))
        _write(os.path.join(base.out, "ablation.txt"), "\n".join(summary) + "\n")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if not args.verbose:
        # the suites shrink q on purpose
        logging.getLogger("awkernel.featuremaps").setLevel(logging.ERROR)
    if args.quick:
        results = checks.ring_separation((4,)) + [checks.nystrom_exactness()]
        results += checks.kernel_consistency()
        results += [checks.inv_sqrt_suite(20), checks.kmeans_monotone_suite(5)]
        results += checks.permutation_suite(10)
    else:
        results = checks.run_all()
    lines = [r.line() for r in results]
    print("\n".join(lines))
    if args.out:
        _write(os.path.join(args.out, "oracle_check.txt"), "\n".join(lines) + "\n")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_bench(args) -> int:
    cfg = run_config(args)
    coll = load_collection(cfg)
    ec = cfg.embed_config()
    rows = []

    def timed(label, fn):
        t = time.perf_counter()
        out = fn()
        rows.append((label, time.perf_counter() - t))
        return out

    walks = timed("walk generation", lambda: extract_walks(coll.graphs, ec))
    model = timed("landmark fitting", lambda: GSKN(ec).fit(coll.graphs, walks))
    timed("embedding", lambda: model.embed_graphs(coll.graphs, walks))

    lengths = [int(s) for s in args.lengths.split(",") if s]
    sweep = []
    for l in lengths:
        t = time.perf_counter()
        for i, g in enumerate(coll.graphs):
            W.anonymize_many(W.sample_graph_walks(g, l, ec.m, W.graph_seed(ec.seed, i))[0])
        sweep.append((l, time.perf_counter() - t))
    t = time.perf_counter()
    for i, g in enumerate(coll.graphs):
        W.anonymize_many(W.sample_graph_walks(g, ec.l_aw, 2 * ec.m, W.graph_seed(ec.seed, i))[0])
    double_m = time.perf_counter() - t

    out = [f"# {json.dumps(snapshot(cfg), sort_keys=True)}", "phase,seconds"]
    out += [f"{label},{secs:.4f}" for label, secs in rows]
    out.append(f"total,{sum(s for _, s in rows):.4f}")
    out += ["", "aw_length,seconds"] + [f"{l},{s:.4f}" for l, s in sweep]
    if len(sweep) >= 2:
        ls, ts = np.log([l for l, _ in sweep]), np.log([max(s, 1e-9) for _, s in sweep])
        slope = float(np.polyfit(ls, ts, 1)[0])
        out.append(f"# log-log slope of AW sampling time vs length: {slope:.2f}")
        log.info("AW phase time ~ l^%.2f", slope)
    base = next((s for l, s in sweep if l == ec.l_aw), None)
    if base:
        out.append(f"# m -> 2m AW sampling time ratio at l={ec.l_aw}: {double_m / base:.2f}")
    text = "\n".join(out) + "\n"
    _write(os.path.join(cfg.out, "bench.csv"), text)
    print(text, end="")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "embed": cmd_embed, "eval": cmd_eval,
            "oracle-check": cmd_oracle_check, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, C.ConfigError) as e:
        print(f"awkernel: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, GenerationError, W.EnumerationOverflow, OSError) as e:
        print(f"awkernel: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
