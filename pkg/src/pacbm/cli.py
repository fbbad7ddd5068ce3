"""Command-line entry point.

Subcommands: gen, decompose, train, eval, predict, explain, serve.
Every command that writes artifacts also writes a run manifest
(<output>.manifest.json beside the output) recording the command, its
configuration, wall time and the sha256 of every written file. Errors
exit nonzero with a single `error: ...` line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .decomposition import decompose_features
from .model.checkpoint import load_model, save_model
from .model.core import model_forward
from .model.explain import formula_document
from .model.metrics import evaluate
from .model.training import TrainConfig, build_datasets, train
from .scene import PATCH_SIZE, UNLABELED, extract_patch, load_scene, save_scene
from .synth import SceneSpec, default_scene_spec, generate_scene


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one-line, machine-parsable
        raise CliError(message)


class CliError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(target: Path, command: str, config: dict, seed,
                   inputs: list[str], started: float) -> Path:
    """Run manifest beside the output; hashes cover every written file."""
    target = Path(target)
    files = sorted(p for p in target.rglob("*") if p.is_file()) if target.is_dir() else [target]
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": inputs,
        "outputs": [str(target)],
        "wall_time_s": time.time() - started,
        "artifact_hashes": {
            str(p.relative_to(target.parent)): _sha256(p) for p in files
        },
    }
    out = Path(str(target) + ".manifest.json")
    out.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return out


def cmd_gen(args) -> int:
    started = time.time()
    if args.spec:
        try:
            spec = SceneSpec.from_jsonable(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except (KeyError, json.JSONDecodeError) as e:
            raise CliError(f"malformed scene spec {args.spec}: {e}") from e
        inputs = [args.spec]
    else:
        spec = default_scene_spec(seed=args.seed)
        inputs = []
    scene = generate_scene(spec)
    save_scene(scene, args.out)
    write_manifest(Path(args.out), "gen", spec.to_jsonable(), spec.seed, inputs, started)
    print(f"wrote PSCENE {args.out} ({scene.height}x{scene.width}, "
          f"{len(scene.class_names)} classes)")
    return 0


def cmd_decompose(args) -> int:
    started = time.time()
    scene = load_scene(args.scene)
    maps = decompose_features(scene.features)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    listing = []
    for name, arr in maps.items():
        fname = f"{name}.f32"
        (out / fname).write_bytes(arr.astype("<f4").tobytes(order="C"))
        listing.append({"name": name, "file": fname})
    (out / "manifest.json").write_text(
        json.dumps({"width": scene.width, "height": scene.height,
                    "layout": "row-major little-endian float32", "maps": listing},
                   indent=2) + "\n",
        encoding="utf-8",
    )
    write_manifest(out, "decompose", {"scene": args.scene}, scene.meta.get("seed"),
                   [args.scene], started)
    print(f"wrote {len(listing)} rasters to {args.out}")
    return 0


def cmd_train(args) -> int:
    started = time.time()
    scene = load_scene(args.scene)
    cfg = TrainConfig(
        strategy=args.strategy, epochs=args.epochs, batch_size=args.batch,
        lr=args.lr, lam=getattr(args, "lambda"), seed=args.seed,
    )
    train_ds, val_ds, mean, std = build_datasets(
        scene, seed=args.seed,
        train_per_class=args.train_per_class, val_per_class=args.val_per_class,
    )
    model = train(train_ds, cfg, norm=(mean, std))
    report = evaluate(model, val_ds)
    model.config["train_per_class"] = args.train_per_class
    model.config["val_per_class"] = args.val_per_class
    model.config["val_report"] = report.to_jsonable()
    save_model(model, args.out)
    write_manifest(Path(args.out), "train", cfg.to_jsonable(), args.seed,
                   [args.scene], started)
    print(f"{args.strategy}: val OA={report.oa:.4f} AA={report.aa:.4f} "
          f"kappa={report.kappa:.4f} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    model = load_model(args.model)
    scene = load_scene(args.scene)
    # default to the split protocol the checkpoint was trained with
    tpc = args.train_per_class or int(model.config.get("train_per_class", 2000))
    vpc = args.val_per_class or int(model.config.get("val_per_class", 500))
    _, val_ds, _, _ = build_datasets(
        scene, seed=int(model.config.get("seed", 0)),
        train_per_class=tpc, val_per_class=vpc,
    )
    report = evaluate(model, val_ds)
    doc = {"model": str(args.model), "scene": str(args.scene),
           "n_val": len(val_ds), **report.to_jsonable()}
    Path(args.report).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    write_manifest(Path(args.report), "eval", {"model": args.model, "scene": args.scene},
                   model.config.get("seed"), [args.model, args.scene], started)
    print(f"OA={report.oa:.4f} AA={report.aa:.4f} kappa={report.kappa:.4f} "
          f"meanAUC={report.mean_concept_auc:.4f} -> {args.report}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    scene = load_scene(args.scene)
    patch = extract_patch(scene, args.row, args.col)
    out = model_forward(patch.data, model)
    doc = {
        "row": args.row,
        "col": args.col,
        "label": out["label"],
        "label_name": model.class_table.class_names[out["label"]],
        "direct_label": out["direct_label"],
        "true_label": patch.label,
        "concepts": out["concept_probs"].tolist(),
        "direct_logits": out["direct_logits"].tolist(),
        "concept_path_logits": out["concept_path_logits"].tolist(),
    }
    print(json.dumps(doc))
    return 0


def cmd_explain(args) -> int:
    started = time.time()
    model = load_model(args.model)
    doc = formula_document(model)
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    write_manifest(Path(args.out), "explain", {"model": args.model},
                   model.config.get("seed"), [args.model], started)
    for cls in doc["classes"]:
        print(f"{cls['class_name']}: fidelity R2 = {cls['fidelity_r2']:.4f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    model = load_model(args.model)
    scene = load_scene(args.scene)
    app = create_app(model, scene, ui_dir=args.ui)
    uvicorn.run(app, host=args.bind, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="pacbm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic PSCENE directory")
    p.add_argument("--spec", help="SceneSpec JSON (omit for the default 6-class scene)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42, help="seed for the default spec")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="write per-pixel decomposition rasters")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("train", help="train a model on a PSCENE directory")
    p.add_argument("--scene", required=True)
    p.add_argument("--strategy", choices=("independent", "sequential", "joint"),
                   default="joint")
    p.add_argument("--lambda", type=float, default=0.7)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-per-class", type=int, default=2000)
    p.add_argument("--val-per-class", type=int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a scene's val split")
    p.add_argument("--model", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--train-per-class", type=int, default=None,
                   help="override the split recorded in the checkpoint")
    p.add_argument("--val-per-class", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one pixel's patch")
    p.add_argument("--model", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--row", type=int, required=True)
    p.add_argument("--col", type=int, required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explain", help="write symbolic concept-to-class formulas")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="serve the HTTP API for one model + scene")
    p.add_argument("--model", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
