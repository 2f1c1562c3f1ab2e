"""Command-line entry points.

Exit codes: 0 success, 1 validation error (bad flags/config), 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import AppConfig, PlacementTrainConfig, TrainConfig


def _ascii_table(scene, table: str, width: int = 32) -> str:
    """Down-sampled character map; letters are category initials."""
    step = max(scene.grid_w // width, 1)
    rows = []
    for y in range(0, scene.grid_h, step * 2):
        row = []
        for x in range(0, scene.grid_w, step):
            ch = "."
            for o in scene.objects_on(table):
                x0, y0, x1, y1 = o.bbox
                if x0 <= x < x1 and y0 <= y < y1:
                    ch = o.category[0].upper() if o.is_container else o.category[0]
                    break
            row.append(ch)
        rows.append("".join(row))
    legend = ", ".join(
        f"{o.id}={o.size} {o.color} {o.category}{' (container)' if o.is_container else ''}"
        for o in scene.objects_on(table)
    )
    return "\n".join(rows) + ("\n  " + legend if legend else "\n  (empty)")


def _print_scene(scene) -> None:
    print("[pick table]")
    print(_ascii_table(scene, "pick"))
    print("[place table]")
    print(_ascii_table(scene, "place"))
    if scene.gripper is not None:
        print(f"[gripper] holding {scene.gripper.id} ({scene.gripper.color} {scene.gripper.category})")


def _load_bundle(args):
    from .language import Vocabulary
    from .models import OracleBundle, TrainedBundle

    if getattr(args, "oracle", False) or not getattr(args, "grounder", None):
        return OracleBundle()
    from .checkpoint import load_grounder, load_placement

    vocab = Vocabulary()
    model, _ = load_grounder(args.grounder, vocab)
    net, _ = load_placement(args.placement)
    return TrainedBundle(model=model, placement_net=net, vocab=vocab)


def cmd_synth(args) -> int:
    from .language import DatasetConfig, build_dataset

    mixture = tuple(float(x) for x in args.mixture.split(","))
    cfg = DatasetConfig(
        n_samples=args.n, mixture=mixture, ambiguity_rate=args.ambiguity_rate
    )
    ds = build_dataset(cfg, seed=args.seed)
    ds.save(args.out)
    print(f"wrote {len(ds.records)} records to {args.out}")
    return 0


def cmd_train_ground(args) -> int:
    from .checkpoint import save_grounder
    from .evaluation import plot_curves, write_curves_csv
    from .grounding import train_grounding
    from .language import GroundingDataset

    ds = GroundingDataset.load(args.data)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed, joint=args.joint)
    model, curves = train_grounding(ds, cfg)
    save_grounder(args.out, model, ds.vocab, cfg, curves)
    out_dir = Path(args.out).parent
    write_curves_csv(
        curves, out_dir / "ground_curves.csv",
        columns=["epoch", "L1", "L_attr", "L2", "L3", "val_accuracy"],
    )
    plot_curves(curves, out_dir / "ground_curves.png")
    print(f"final val accuracy: {curves[-1]['val_accuracy']:.4f}" if curves else "no epochs run")
    return 0


def cmd_train_place(args) -> int:
    from .checkpoint import save_placement
    from .evaluation import plot_curves, write_curves_csv
    from .placement import train_placement

    cfg = PlacementTrainConfig(
        epochs=args.epochs, n_scenes=args.scenes, seed=args.seed,
        classifier_mode=args.classifier,
    )
    net, curves = train_placement(cfg)
    save_placement(args.out, net, cfg, curves)
    out_dir = Path(args.out).parent
    write_curves_csv(curves, out_dir / "place_curves.csv")
    plot_curves(curves, out_dir / "place_curves.png", keys=("loss", "sat_mean"))
    if curves:
        print(f"final mean satisfaction: {curves[-1]['sat_mean']:.4f}")
    return 0


def cmd_pretrain_aux(args) -> int:
    from .checkpoint import save_aux
    from .placement import pretrain_aux_classifier

    clf, agreement = pretrain_aux_classifier(n_scenes=args.scenes, seed=args.seed)
    save_aux(args.out, clf.net, agreement)
    print(f"oracle agreement: {agreement:.4f}")
    return 0


def cmd_eval(args) -> int:
    import torch

    torch.set_num_threads(2)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.suite == "report":
        from .evaluation import table2_report

        metrics, skipped = table2_report(args.logs, out_dir=out)
        print((out / "report.csv").read_text())
        if skipped:
            print(f"skipped {skipped} malformed log lines")
        return 0
    if args.suite == "comprehension":
        from .checkpoint import load_grounder
        from .evaluation import eval_comprehension
        from .language import GroundingDataset, Vocabulary

        ds = GroundingDataset.load(args.data)
        model, _ = load_grounder(args.grounder, Vocabulary())
        rows = []
        for criterion in ("exact_id", "iou_0_5"):
            res = eval_comprehension(ds, model, criterion=criterion)
            rows.append(res)
            print(f"{criterion}: {res['overall']:.4f} over {res['n']} ({res['by_kind']})")
        (out / "comprehension.json").write_text(json.dumps(rows, indent=2))
        return 0
    if args.suite == "generation":
        from .checkpoint import load_grounder
        from .evaluation import eval_generation
        from .language import GroundingDataset, Vocabulary

        ds = GroundingDataset.load(args.data)
        model, _ = load_grounder(args.grounder, Vocabulary())
        res = eval_generation(ds, model, ds.vocab)
        print(f"discriminative accuracy: {res['discriminative_accuracy']:.4f} over {res['n']}")
        (out / "generation.json").write_text(json.dumps(res, indent=2))
        return 0
    if args.suite == "placement":
        from .checkpoint import load_placement
        from .evaluation import eval_placement, plot_relation_bars
        from .placement import build_placement_scenes, maps_for_scene

        net, _ = load_placement(args.placement)
        examples = build_placement_scenes(args.scenes, seed=args.seed, tag="eval")
        table = eval_placement(examples, net=net)
        for rel, row in table.items():
            sat = "n/a" if row["satisfaction"] is None else f"{row['satisfaction']:.4f}"
            print(f"{rel:>9}: satisfaction {sat} (coverage {row['coverage']})")
        (out / "placement.json").write_text(json.dumps(table, indent=2))
        plot_relation_bars(table, out / "placement.png")
        # heatmap exports for the first applicable scene
        from .placement import export_heatmap_png
        from .worldsim import RELATIONS

        maps = maps_for_scene(examples[0].scene, "place", examples[0].ref_id, net)
        for rel in RELATIONS:
            export_heatmap_png(maps, rel, out / f"heatmap_{rel}.png")
        return 0
    if args.suite == "acceptance":
        import csv

        from .checkpoint import load_grounder, load_placement
        from .dialogue import ScriptedUser, make_tidy_scene, run_task
        from .evaluation import eval_comprehension, eval_generation, eval_placement
        from .language import GroundingDataset, Vocabulary
        from .models import TrainedBundle
        from .placement import build_placement_scenes

        ds = GroundingDataset.load(args.data)
        vocab = Vocabulary()
        model, _ = load_grounder(args.grounder, vocab)
        net, _ = load_placement(args.placement)
        rows = []
        exact = eval_comprehension(ds, model, criterion="exact_id")
        iou_res = eval_comprehension(ds, model, criterion="iou_0_5")
        rows.append(("comprehension_exact_id", exact["overall"], 0.90, exact["overall"] >= 0.90))
        gap = abs(exact["overall"] - iou_res["overall"])
        rows.append(("comprehension_iou_gap", gap, 0.02, gap <= 0.02))
        gen = eval_generation(ds, model, ds.vocab)
        rows.append(
            ("generation_discriminative", gen["discriminative_accuracy"], 0.85,
             gen["discriminative_accuracy"] >= 0.85)
        )
        examples = build_placement_scenes(args.scenes, seed=args.seed, tag="accept")
        table = eval_placement(examples, net=net)
        for rel, row in table.items():
            if row["satisfaction"] is not None:
                rows.append((f"placement_{rel}", row["satisfaction"], 0.90, row["satisfaction"] >= 0.90))
        bundle = TrainedBundle(model=model, placement_net=net, vocab=vocab)
        scene, script = make_tidy_scene(seed=args.seed)
        result = run_task(script, scene, bundle, grasp_p=1.0, seed=args.seed,
                          scripted_user=ScriptedUser())
        length = result.metrics.mean_task_length
        rows.append(("tidy_up_actions", length, 8, length == 8))
        with open(out / "acceptance.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["metric", "value", "threshold", "pass"])
            for name, value, threshold, ok in rows:
                writer.writerow([name, f"{value:.4f}", threshold, ok])
        for name, value, threshold, ok in rows:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.4f} (threshold {threshold})")
        return 0 if all(r[3] for r in rows) else 2
    if args.suite == "placement-compare":
        from .placement import build_placement_scenes, satisfaction_rates, train_placement

        report = {}
        for mode in ("oracle", "learned"):
            cfg = PlacementTrainConfig(
                epochs=args.epochs, n_scenes=args.scenes, seed=args.seed,
                classifier_mode=mode,
            )
            net, curves = train_placement(cfg)
            first_hit = next(
                (c["epoch"] for c in curves if (c["sat_mean"] or 0) >= 0.9), None
            )
            report[mode] = {
                "first_epoch_reaching_0.9": first_hit,
                "final_mean_satisfaction": curves[-1]["sat_mean"] if curves else None,
            }
            print(f"{mode}: {report[mode]}")
        (out / "placement_compare.json").write_text(json.dumps(report, indent=2))
        return 0
    print(f"unknown suite {args.suite!r}", file=sys.stderr)
    return 1


def cmd_repl(args) -> int:
    from .dialogue import DialogueState, step
    from .worldsim import SceneConfig, generate_scene

    bundle = _load_bundle(args)
    scene = generate_scene(
        SceneConfig(n_pick=args.n_pick, n_place=args.n_place, ambiguity=args.ambiguity),
        args.seed,
    )
    state = DialogueState()
    turn = 0
    _print_scene(scene)
    print("type instructions (ctrl-d to quit):")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        result = step(state, scene, text, bundle, seed=args.seed * 7919 + turn,
                      grasp_p=args.grasp_p)
        scene, state = result.scene, result.state
        turn += 1
        print(f"robot: {result.action.text}")
        if result.action.kind in ("picked", "placed"):
            _print_scene(scene)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionStore, create_app

    config = AppConfig.from_file(args.config) if args.config else AppConfig()
    if args.port:
        config.port = args.port
    bundle = _load_bundle(args)
    store = SessionStore(
        Path(config.data_dir) / "sessions", bundle, grid=config.grid,
        grasp_p=config.grasp_success_prob, place_p=config.place_success_prob,
        ttl_seconds=config.session_ttl_seconds,
    )
    app = create_app(store)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def cmd_replay(args) -> int:
    from .service import replay_session

    bundle = _load_bundle(args)
    scene, state, verified = replay_session(args.log, bundle)
    if not verified:
        print("replay FAILED: scene hashes diverged", file=sys.stderr)
        return 2
    print(f"scene verified ({len(scene.objects)} objects, phase {state.phase})")
    return 0


def cmd_demo(args) -> int:
    from .dialogue import ScriptedUser, make_tidy_scene, run_task

    bundle = _load_bundle(args)
    scene, script = make_tidy_scene(seed=args.seed)
    print("tidy-up script:")
    for s in script.steps:
        print(f"  {s.text}")
    result = run_task(
        script, scene, bundle, grasp_p=args.grasp_p, seed=args.seed,
        scripted_user=ScriptedUser(),
    )
    print("\ntranscript:")
    for speaker, text in result.transcript:
        print(f"  {speaker}: {text}")
    print("\nmetrics:")
    for k, v in result.metrics.ratios().items():
        print(f"  {k}: {v:.3f}")
    _print_scene(result.scene)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tabletalk")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="build a labeled grounding dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n", type=int, default=5000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mixture", default="0.5,0.3,0.2")
    sp.add_argument("--ambiguity-rate", type=float, default=0.0)
    sp.set_defaults(fn=cmd_synth)

    sp = sub.add_parser("train-ground", help="train the grounding network")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--epochs", type=int, default=40)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--joint", action="store_true", help="add generation losses")
    sp.set_defaults(fn=cmd_train_ground)

    sp = sub.add_parser("train-place", help="train the placement maps")
    sp.add_argument("--out", required=True)
    sp.add_argument("--scenes", type=int, default=2000)
    sp.add_argument("--epochs", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--classifier", choices=("oracle", "learned"), default="oracle")
    sp.set_defaults(fn=cmd_train_place)

    sp = sub.add_parser("pretrain-aux", help="pretrain the learned relation classifier")
    sp.add_argument("--out", required=True)
    sp.add_argument("--scenes", type=int, default=300)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_pretrain_aux)

    sp = sub.add_parser("eval", help="run a benchmark suite")
    sp.add_argument("--suite", required=True,
                    choices=("comprehension", "generation", "placement",
                             "placement-compare", "report", "acceptance"))
    sp.add_argument("--data")
    sp.add_argument("--grounder")
    sp.add_argument("--placement")
    sp.add_argument("--logs", nargs="*", default=[])
    sp.add_argument("--out", default="reports")
    sp.add_argument("--scenes", type=int, default=300)
    sp.add_argument("--epochs", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("repl", help="interactive dialogue on stdin/stdout")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-pick", type=int, default=5)
    sp.add_argument("--n-place", type=int, default=2)
    sp.add_argument("--ambiguity", action="store_true")
    sp.add_argument("--grasp-p", type=float, default=1.0)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--grounder")
    sp.add_argument("--placement")
    sp.set_defaults(fn=cmd_repl)

    sp = sub.add_parser("serve", help="run the HTTP session service")
    sp.add_argument("--config")
    sp.add_argument("--port", type=int)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--grounder")
    sp.add_argument("--placement")
    sp.set_defaults(fn=cmd_serve)

    sp = sub.add_parser("replay", help="re-execute a session log and verify")
    sp.add_argument("log")
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--grounder")
    sp.add_argument("--placement")
    sp.set_defaults(fn=cmd_replay)

    sp = sub.add_parser("demo", help="run the tidy-up task end to end")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grasp-p", type=float, default=1.0)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--grounder")
    sp.add_argument("--placement")
    sp.set_defaults(fn=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
