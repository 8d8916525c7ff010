"""Command-line pipeline: generation, labeling, training, evaluation, serving.

Stages compose through files under ``--data-dir`` only; every command that
produces artifacts writes a run manifest next to them recording the full
configuration, seeds, input/output hashes, and wall-clock time, so any
artifact can be rebuilt from its manifest alone. All commands are
deterministic given ``--seed``. Options can also be set via environment
variables with the ``SITGEN_`` prefix (e.g. ``SITGEN_SYNTH_USERS``).
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .datagen import (
    DatasetSplit,
    SplitError,
    SynthConfig,
    default_keyword_table,
    distribution_report,
    label_streams,
    load_keyword_table,
    make_split,
    read_corpus,
    read_demographics,
    read_logs,
    read_playlists,
    read_split,
    synth_generate,
    write_corpus,
    write_demographics,
    write_playlists,
    write_split,
)
from .eval import (
    EvalData,
    EvalReport,
    UamatExperimentConfig,
    combine_seed_results,
    confusion_csv,
    local_vs_global,
    local_vs_global_csv,
    render_local_vs_global,
    render_report_table,
    report_csv,
    run_protocol_seed,
    sp_design_matrix,
)
from .features.als import InteractionMatrix, train_user_embeddings
from .features.encoders import CountryVocab
from .gbdt import SpTrainConfig, read_forest, sp_train, write_forest
from .gbdt.forestio import forest_to_bytes
from .features.matrixio import read_matrix_archive, write_matrix_archive
from .nn import TrainConfig, UamatConfig, UamatModel, load_model, save_model, train
from .nn.modelio import model_to_bytes
from .service import (
    ServiceConfig,
    ServiceState,
    StateHolder,
    build_tag_store,
    create_app,
    read_store,
    write_store,
)

# ---- run manifests ----


@dataclass
class RunManifest:
    """Provenance record for one artifact-producing command."""

    command: str
    config: dict
    seeds: list[int]
    inputs: dict[str, dict] = field(default_factory=dict)
    outputs: dict[str, dict] = field(default_factory=dict)
    model_hashes: dict[str, str] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    tool_version: str = __version__
    created_at: str = ""

    def add_input(self, name: str, path: Path) -> None:
        self.inputs[name] = {"path": str(path), "sha256": _file_digest(path)}

    def add_output(self, name: str, path: Path) -> None:
        self.outputs[name] = {"path": str(path), "sha256": _file_digest(path)}

    def write(self, path: Path, started: float) -> None:
        self.wall_clock_s = round(time.monotonic() - started, 3)
        self.created_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        path.write_text(json.dumps(asdict(self), sort_keys=True, indent=2))


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fail(message: str) -> None:
    """One-line diagnostic, nonzero exit."""
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _run_guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, SplitError, FileNotFoundError, KeyError) as exc:
        _fail(str(exc))


def _data_path(ctx: click.Context, name: str) -> Path:
    return Path(ctx.obj["data_dir"]) / name


# ---- group ----


@click.group(context_settings={"auto_envvar_prefix": "SITGEN"})
@click.option(
    "--data-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory all relative artifact paths resolve against.",
)
@click.option(
    "--jobs",
    type=int,
    default=1,
    show_default=True,
    help="Worker processes for parallelizable stages (results are identical "
    "for any worker count).",
)
@click.pass_context
def main(ctx: click.Context, data_dir: Path, jobs: int) -> None:
    """Situational music-session pipeline."""
    data_dir.mkdir(parents=True, exist_ok=True)
    ctx.obj = {"data_dir": data_dir, "jobs": max(1, jobs)}


# ---- synth ----


@main.command()
@click.option("--users", type=int, default=200, show_default=True)
@click.option("--tracks", type=int, default=1000, show_default=True)
@click.option("--streams", type=int, default=20000, show_default=True)
@click.option("--c", type=click.Choice(["4", "8", "12"]), default="4", show_default=True)
@click.option("--signal-strength", type=float, default=0.9, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-mels", type=int, default=32, show_default=True)
@click.option("--n-frames", type=int, default=64, show_default=True)
@click.option(
    "--locations",
    default="FR:0.6,BR:0.4",
    show_default=True,
    help="Comma list of COUNTRY:WEIGHT pairs.",
)
@click.option(
    "--location-hour-shifts",
    default=None,
    help="Comma list of clock offsets (hours), one per location.",
)
@click.option("--prefix", default="", help="Filename prefix for the artifacts.")
@click.pass_context
def synth(
    ctx, users, tracks, streams, c, signal_strength, seed, n_mels, n_frames,
    locations, location_hour_shifts, prefix,
):
    """Generate a seeded synthetic corpus with known structure."""
    started = time.monotonic()
    try:
        loc_pairs = tuple(
            (part.split(":")[0], float(part.split(":")[1]))
            for part in locations.split(",")
        )
    except (IndexError, ValueError):
        _fail(f"cannot parse --locations {locations!r}; expected CC:W,CC:W")
    shifts = None
    if location_hour_shifts is not None:
        try:
            shifts = tuple(float(v) for v in location_hour_shifts.split(","))
        except ValueError:
            _fail(f"cannot parse --location-hour-shifts {location_hour_shifts!r}")

    cfg = _run_guarded(
        SynthConfig,
        n_users=users,
        n_tracks=tracks,
        n_streams=streams,
        c=int(c),
        signal_strength=signal_strength,
        locations=loc_pairs,
        seed=seed,
        n_mels=n_mels,
        n_frames=n_frames,
        location_hour_shifts=shifts,
    )
    bundle = _run_guarded(synth_generate, cfg)

    out = {
        "corpus": _data_path(ctx, f"{prefix}corpus.jsonl"),
        "playlists": _data_path(ctx, f"{prefix}playlists.jsonl"),
        "demographics": _data_path(ctx, f"{prefix}demographics.csv"),
        "mels": _data_path(ctx, f"{prefix}mels.sgm"),
    }
    write_corpus(out["corpus"], bundle.streams, cfg.c)
    write_playlists(out["playlists"], bundle.playlists)
    write_demographics(out["demographics"], bundle.demographics)
    write_matrix_archive(out["mels"], bundle.audio)

    manifest = RunManifest(
        command="synth",
        config={
            "n_users": users, "n_tracks": tracks, "n_streams": streams,
            "c": int(c), "signal_strength": signal_strength,
            "locations": locations, "location_hour_shifts": location_hour_shifts,
            "n_mels": n_mels, "n_frames": n_frames,
        },
        seeds=[seed],
    )
    for name, path in out.items():
        manifest.add_output(name, path)
    manifest.add_output("mels_index", Path(str(out["mels"]) + ".index.json"))
    manifest.write(_data_path(ctx, f"{prefix}synth.manifest.json"), started)
    click.echo(f"wrote {len(bundle.streams)} streams to {out['corpus']}")


# ---- ingest ----


@main.command()
@click.option("--playlists", "playlists_file", required=True, type=click.Path(path_type=Path))
@click.option("--logs", "logs_file", required=True, type=click.Path(path_type=Path))
@click.option("--c", type=click.Choice(["4", "8", "12"]), default="12", show_default=True)
@click.option("--keywords", "keywords_file", default=None, type=click.Path(path_type=Path),
              help="JSON keyword table overriding the built-in one.")
@click.option("--out", default="corpus.jsonl", show_default=True)
@click.pass_context
def ingest(ctx, playlists_file, logs_file, c, keywords_file, out):
    """Label raw play logs through the playlist-title proxy."""
    started = time.monotonic()
    playlists_file = _resolve(ctx, playlists_file)
    logs_file = _resolve(ctx, logs_file)
    playlists = _run_guarded(read_playlists, playlists_file)
    logs = _run_guarded(read_logs, logs_file)
    kw = (
        _run_guarded(load_keyword_table, _resolve(ctx, keywords_file))
        if keywords_file
        else default_keyword_table()
    )
    labeled, diag = _run_guarded(label_streams, playlists, logs, kw)
    keep = [s for s in labeled if s.situation.index < int(c)]
    out_path = _data_path(ctx, out)
    write_corpus(out_path, keep, int(c))
    diag_path = Path(str(out_path) + ".labeling.csv")
    diag_path.write_text(
        "counter,value\n" + "".join(f"{k},{v}\n" for k, v in diag.rows())
    )

    manifest = RunManifest(
        command="ingest",
        config={"c": int(c), "keywords": str(keywords_file) if keywords_file else None},
        seeds=[],
    )
    manifest.add_input("playlists", playlists_file)
    manifest.add_input("logs", logs_file)
    manifest.add_output("corpus", out_path)
    manifest.add_output("labeling", diag_path)
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(
        f"labeled {diag.labeled} of {len(logs)} logged streams "
        f"({len(keep)} within C={c}) to {out_path}"
    )


def _resolve(ctx: click.Context, path: Path) -> Path:
    path = Path(path)
    return path if path.is_absolute() else Path(ctx.obj["data_dir"]) / path


# ---- split ----


@main.command()
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--kind", type=click.Choice(["warm", "cold_user", "cold_track"]), required=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, help="Defaults to split_<kind>_<seed>.json.")
@click.pass_context
def split(ctx, corpus, kind, test_fraction, seed, out):
    """Partition a corpus into train/test by the chosen protocol."""
    started = time.monotonic()
    corpus_path = _resolve(ctx, corpus)
    streams, _c = _run_guarded(read_corpus, corpus_path)
    result: DatasetSplit = _run_guarded(
        make_split, streams, kind, test_fraction, seed
    )
    out_path = _data_path(ctx, out or f"split_{kind}_{seed}.json")
    write_split(out_path, result, corpus_path.name)

    manifest = RunManifest(
        command="split",
        config={"kind": kind, "test_fraction": test_fraction},
        seeds=[seed],
    )
    manifest.add_input("corpus", corpus_path)
    manifest.add_output("split", out_path)
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(
        f"split {len(result.train)} train / {len(result.test)} test to {out_path}"
    )


# ---- embed ----


@main.command()
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--split", "split_file", default=None, type=click.Path(path_type=Path),
              help="Restrict interactions to the split's training streams.")
@click.option("--dim", type=int, default=128, show_default=True)
@click.option("--iters", type=int, default=15, show_default=True)
@click.option("--alpha", type=float, default=40.0, show_default=True)
@click.option("--reg", type=float, default=0.01, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="embeddings.sgm", show_default=True)
@click.pass_context
def embed(ctx, corpus, split_file, dim, iters, alpha, reg, seed, out):
    """Factor play counts into user embeddings."""
    started = time.monotonic()
    corpus_path = _resolve(ctx, corpus)
    streams, _c = _run_guarded(read_corpus, corpus_path)
    if split_file:
        split_path = _resolve(ctx, split_file)
        streams = list(_run_guarded(read_split, split_path, streams).train)
    counts: dict[tuple[str, str], float] = {}
    for s in streams:
        counts[(s.user, s.track)] = counts.get((s.user, s.track), 0.0) + 1.0
    matrix = InteractionMatrix.from_counts(counts)
    model = _run_guarded(
        train_user_embeddings, matrix, d=dim, reg=reg, alpha=alpha,
        iters=iters, seed=seed,
    )
    out_path = _data_path(ctx, out)
    write_matrix_archive(
        out_path,
        {
            u: model.user_factors[i].astype(np.float32)
            for i, u in enumerate(model.user_ids)
        },
    )

    manifest = RunManifest(
        command="embed",
        config={"dim": dim, "iters": iters, "alpha": alpha, "reg": reg,
                "split": str(split_file) if split_file else None},
        seeds=[seed],
    )
    manifest.add_input("corpus", corpus_path)
    manifest.add_output("embeddings", out_path)
    manifest.add_output("embeddings_index", Path(str(out_path) + ".index.json"))
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(f"embedded {len(model.user_ids)} users to {out_path}")


# ---- train-uamat ----


@main.command("train-uamat")
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--mels", default="mels.sgm", show_default=True, type=click.Path(path_type=Path))
@click.option("--embeddings", default="embeddings.sgm", show_default=True, type=click.Path(path_type=Path))
@click.option("--split", "split_file", default=None, type=click.Path(path_type=Path),
              help="Train on the split's training streams only.")
@click.option("--width", type=float, default=0.25, show_default=True)
@click.option("--lr0", type=float, default=3e-3, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--patience", type=int, default=3, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--val-fraction", type=float, default=0.1, show_default=True)
@click.option("--dropout", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="uamat.uam", show_default=True)
@click.pass_context
def train_uamat(
    ctx, corpus, mels, embeddings, split_file, width, lr0, epochs, patience,
    batch_size, val_fraction, dropout, seed, out,
):
    """Train the audio/user tagging network."""
    started = time.monotonic()
    corpus_path = _resolve(ctx, corpus)
    mels_path = _resolve(ctx, mels)
    emb_path = _resolve(ctx, embeddings)
    streams, c = _run_guarded(read_corpus, corpus_path)
    if split_file:
        streams = list(
            _run_guarded(read_split, _resolve(ctx, split_file), streams).train
        )
    audio = _run_guarded(read_matrix_archive, mels_path)
    emb = _run_guarded(read_matrix_archive, emb_path)
    emb = {u: m[0] for u, m in emb.items()}  # archives store 1×d rows

    missing = sorted({s.track for s in streams} - set(audio))
    if missing:
        _fail(f"{len(missing)} corpus tracks missing from {mels_path}: {missing[:3]}")
    user_dim = len(next(iter(emb.values()))) if emb else 0
    if user_dim == 0:
        _fail(f"no embeddings found in {emb_path}")

    mel_batch = np.stack([audio[s.track] for s in streams])
    user_batch = np.zeros((len(streams), user_dim), dtype=np.float32)
    for i, s in enumerate(streams):
        vec = emb.get(s.user)
        if vec is not None:
            user_batch[i] = vec
    labels = np.array([s.situation.index for s in streams])

    model = UamatModel.build(
        UamatConfig(
            c=c,
            n_mels=mel_batch.shape[1],
            n_frames=mel_batch.shape[2],
            user_dim=user_dim,
            width=width,
            dropout=dropout,
            init_seed=seed,
        )
    )
    cfg = TrainConfig(
        lr0=lr0, max_epochs=epochs, patience=patience, batch_size=batch_size,
        val_fraction=val_fraction, seed=seed,
    )
    model, history = _run_guarded(train, model, mel_batch, user_batch, labels, cfg)
    out_path = _data_path(ctx, out)
    save_model(out_path, model)

    manifest = RunManifest(
        command="train-uamat",
        config={
            "width": width, "lr0": lr0, "epochs": epochs, "patience": patience,
            "batch_size": batch_size, "val_fraction": val_fraction,
            "dropout": dropout, "split": str(split_file) if split_file else None,
        },
        seeds=[seed],
        model_hashes={
            "uamat": hashlib.sha256(model_to_bytes(model)).hexdigest()
        },
    )
    manifest.add_input("corpus", corpus_path)
    manifest.add_input("mels", mels_path)
    manifest.add_input("embeddings", emb_path)
    manifest.add_output("model", out_path)
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(
        f"trained {len(streams)} streams, best val loss "
        f"{history.best_val_loss:.4f} at epoch {history.best_epoch}, "
        f"saved {out_path}"
    )


# ---- train-sp ----


@main.command("train-sp")
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--demographics", "demo_file", default="demographics.csv", show_default=True, type=click.Path(path_type=Path))
@click.option("--split", "split_file", default=None, type=click.Path(path_type=Path))
@click.option("--rounds", type=int, default=100, show_default=True)
@click.option("--max-depth", type=int, default=6, show_default=True)
@click.option("--shrinkage", type=float, default=0.3, show_default=True)
@click.option("--l2-reg", type=float, default=1.0, show_default=True)
@click.option("--out", default="sp.spf", show_default=True)
@click.pass_context
def train_sp(
    ctx, corpus, demo_file, split_file, rounds, max_depth, shrinkage, l2_reg, out
):
    """Train the real-time situation predictor."""
    started = time.monotonic()
    corpus_path = _resolve(ctx, corpus)
    demo_path = _resolve(ctx, demo_file)
    streams, c = _run_guarded(read_corpus, corpus_path)
    demographics = _run_guarded(read_demographics, demo_path)
    if split_file:
        streams = list(
            _run_guarded(read_split, _resolve(ctx, split_file), streams).train
        )
    x_train, y_train, vocab = _run_guarded(sp_design_matrix, streams, demographics)
    cfg = _run_guarded(
        SpTrainConfig,
        rounds=rounds, max_depth=max_depth, shrinkage=shrinkage, l2_reg=l2_reg,
    )
    forest = _run_guarded(sp_train, x_train, y_train, cfg, c=c)
    out_path = _data_path(ctx, out)
    write_forest(out_path, forest)
    vocab_path = Path(str(out_path) + ".vocab.json")
    vocab_path.write_text(json.dumps(vocab.to_json(), sort_keys=True))

    manifest = RunManifest(
        command="train-sp",
        config={"rounds": rounds, "max_depth": max_depth, "shrinkage": shrinkage,
                "l2_reg": l2_reg, "split": str(split_file) if split_file else None},
        seeds=[],
        model_hashes={
            "sp": hashlib.sha256(forest_to_bytes(forest)).hexdigest()
        },
    )
    manifest.add_input("corpus", corpus_path)
    manifest.add_input("demographics", demo_path)
    manifest.add_output("forest", out_path)
    manifest.add_output("vocab", vocab_path)
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(
        f"trained {rounds} rounds on {len(x_train)} streams, final log-loss "
        f"{forest.train_loss_history[-1]:.4f}, saved {out_path}"
    )


# ---- evaluate ----


@main.command()
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--demographics", "demo_file", default="demographics.csv", show_default=True, type=click.Path(path_type=Path))
@click.option("--mels", default="mels.sgm", show_default=True, type=click.Path(path_type=Path))
@click.option("--protocol", type=click.Choice(["warm", "cold_user", "cold_track"]), default="warm", show_default=True)
@click.option("--c", "c_opt", type=click.Choice(["4", "8", "12"]), default=None,
              help="Defaults to the corpus header's taxonomy size.")
@click.option("--branches", default="sp,uamat", show_default=True)
@click.option("--seeds", default="0,1,2", show_default=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--rounds", type=int, default=100, show_default=True)
@click.option("--max-depth", type=int, default=6, show_default=True)
@click.option("--width", type=float, default=0.25, show_default=True)
@click.option("--lr0", type=float, default=3e-3, show_default=True)
@click.option("--epochs", type=int, default=5, show_default=True)
@click.option("--patience", type=int, default=2, show_default=True)
@click.option("--embedding-dim", type=int, default=128, show_default=True)
@click.option("--local-global", is_flag=True,
              help="Compare per-location vs global real-time models instead.")
@click.option("--out", default="report", show_default=True,
              help="Output stem; writes <stem>.json/.csv and confusion grids.")
@click.pass_context
def evaluate(
    ctx, corpus, demo_file, mels, protocol, c_opt, branches, seeds,
    test_fraction, k, rounds, max_depth, width, lr0, epochs, patience,
    embedding_dim, local_global, out,
):
    """Run an evaluation protocol cell and write its report."""
    started = time.monotonic()
    corpus_path = _resolve(ctx, corpus)
    demo_path = _resolve(ctx, demo_file)
    streams, corpus_c = _run_guarded(read_corpus, corpus_path)
    demographics = _run_guarded(read_demographics, demo_path)
    c = int(c_opt) if c_opt else corpus_c
    try:
        seed_list = tuple(int(v) for v in seeds.split(","))
    except ValueError:
        _fail(f"cannot parse --seeds {seeds!r}")
    branch_list = tuple(b.strip() for b in branches.split(",") if b.strip())
    sp_cfg = _run_guarded(SpTrainConfig, rounds=rounds, max_depth=max_depth)

    manifest = RunManifest(
        command="evaluate",
        config={
            "protocol": protocol, "c": c, "branches": branches,
            "test_fraction": test_fraction, "k": k, "rounds": rounds,
            "max_depth": max_depth, "width": width, "lr0": lr0,
            "epochs": epochs, "patience": patience,
            "embedding_dim": embedding_dim, "local_global": local_global,
        },
        seeds=list(seed_list),
    )
    manifest.add_input("corpus", corpus_path)
    manifest.add_input("demographics", demo_path)

    if local_global:
        rows, skipped = _run_guarded(
            local_vs_global, streams, c, demographics,
            seeds=seed_list, sp_cfg=sp_cfg, test_fraction=test_fraction,
        )
        for loc in skipped:
            click.echo(f"warning: location {loc} has too few streams; skipped", err=True)
        csv_path = _data_path(ctx, f"{out}.csv")
        csv_path.write_text(local_vs_global_csv(rows))
        txt = render_local_vs_global(rows)
        txt_path = _data_path(ctx, f"{out}.txt")
        txt_path.write_text(txt)
        manifest.add_output("table", csv_path)
        manifest.add_output("rendered", txt_path)
        manifest.write(_data_path(ctx, f"{out}.manifest.json"), started)
        click.echo(txt)
        return

    mels_path = _resolve(ctx, mels)
    audio = (
        _run_guarded(read_matrix_archive, mels_path)
        if "uamat" in branch_list
        else None
    )
    if audio is not None:
        manifest.add_input("mels", mels_path)
    data = EvalData(demographics=demographics, audio=audio)
    ua_cfg = UamatExperimentConfig(
        width=width, lr0=lr0, max_epochs=epochs, patience=patience,
        embedding_dim=embedding_dim,
    )

    jobs = ctx.obj["jobs"]
    args = [
        (streams, c, protocol, data, seed, branch_list, sp_cfg, ua_cfg,
         test_fraction, k)
        for seed in seed_list
    ]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
            results = list(pool.map(_protocol_cell, args))
    else:
        results = [_protocol_cell(a) for a in args]
    report = combine_seed_results(protocol, c, k, branch_list, results)

    json_path = _data_path(ctx, f"{out}.json")
    json_path.write_text(report.to_json_str())
    csv_path = _data_path(ctx, f"{out}.csv")
    csv_path.write_text(report_csv(report))
    manifest.add_output("report_json", json_path)
    manifest.add_output("report_csv", csv_path)
    for branch in report.branches:
        conf_path = _data_path(ctx, f"{out}.confusion_{branch}.csv")
        conf_path.write_text(confusion_csv(report, branch))
        manifest.add_output(f"confusion_{branch}", conf_path)
    manifest.write(_data_path(ctx, f"{out}.manifest.json"), started)
    click.echo(render_report_table([report]))


def _protocol_cell(args):
    return run_protocol_seed(*args)


# ---- report ----


@main.command()
@click.argument("report_files", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option("--out", default=None, help="Write the table here instead of stdout.")
@click.pass_context
def report(ctx, report_files, out):
    """Render report JSON files as an aligned text table."""
    reports = []
    for path in report_files:
        payload = _run_guarded(
            json.loads, Path(_resolve(ctx, path)).read_text()
        )
        reports.append(_run_guarded(EvalReport.from_json, payload))
    text = render_report_table(reports)
    if out:
        _data_path(ctx, out).write_text(text)
        click.echo(f"wrote {_data_path(ctx, out)}")
    else:
        click.echo(text)


# ---- build-store ----


@main.command("build-store")
@click.option("--model", "model_file", default="uamat.uam", show_default=True, type=click.Path(path_type=Path))
@click.option("--corpus", default="corpus.jsonl", show_default=True, type=click.Path(path_type=Path))
@click.option("--mels", default="mels.sgm", show_default=True, type=click.Path(path_type=Path))
@click.option("--embeddings", default="embeddings.sgm", show_default=True, type=click.Path(path_type=Path))
@click.option("--out", default="tagstore.tgs", show_default=True)
@click.pass_context
def build_store(ctx, model_file, corpus, mels, embeddings, out):
    """Precompute the (track, user) situation distributions."""
    started = time.monotonic()
    model_path = _resolve(ctx, model_file)
    corpus_path = _resolve(ctx, corpus)
    mels_path = _resolve(ctx, mels)
    emb_path = _resolve(ctx, embeddings)
    model = _run_guarded(load_model, model_path)
    streams, _c = _run_guarded(read_corpus, corpus_path)
    audio = _run_guarded(read_matrix_archive, mels_path)
    emb = {u: m[0] for u, m in _run_guarded(read_matrix_archive, emb_path).items()}

    tracks = sorted({s.track for s in streams})
    users = sorted({s.user for s in streams})
    store = _run_guarded(
        build_tag_store, model, tracks, users, audio, emb, labeled_streams=streams
    )
    out_path = _data_path(ctx, out)
    write_store(out_path, store)

    manifest = RunManifest(
        command="build-store",
        config={"tracks": len(tracks), "users": len(users)},
        seeds=[],
        model_hashes={"uamat": store.model_hash, "tag_store": store.store_hash()},
    )
    manifest.add_input("model", model_path)
    manifest.add_input("corpus", corpus_path)
    manifest.add_input("mels", mels_path)
    manifest.add_input("embeddings", emb_path)
    manifest.add_output("store", out_path)
    manifest.write(Path(str(out_path) + ".manifest.json"), started)
    click.echo(
        f"stored {store.n_pairs} pairs ({store.skipped_pairs} skipped) to {out_path}"
    )


# ---- serve ----


@main.command()
@click.option("--sp", "sp_file", default="sp.spf", show_default=True, type=click.Path(path_type=Path))
@click.option("--vocab", "vocab_file", default=None,
              help="Defaults to <sp>.vocab.json next to the forest.")
@click.option("--demographics", "demo_file", default="demographics.csv", show_default=True, type=click.Path(path_type=Path))
@click.option("--store", "store_file", default="tagstore.tgs", show_default=True, type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--floor", type=float, default=None,
              help="Session probability floor; defaults to 1/C.")
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--n", type=int, default=30, show_default=True)
@click.pass_context
def serve(ctx, sp_file, vocab_file, demo_file, store_file, host, port, floor, k, n):
    """Serve situation ranking and session generation over HTTP."""
    import uvicorn

    holder = _run_guarded(
        load_service_state, ctx, sp_file, vocab_file, demo_file, store_file,
        floor, k, n,
    )
    app = create_app(holder)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def load_service_state(
    ctx, sp_file, vocab_file, demo_file, store_file, floor, k, n
) -> StateHolder:
    sp_path = _resolve(ctx, Path(sp_file))
    vocab_path = (
        _resolve(ctx, Path(vocab_file))
        if vocab_file
        else Path(str(sp_path) + ".vocab.json")
    )
    forest = read_forest(sp_path)
    vocab = CountryVocab.from_json(json.loads(vocab_path.read_text()))
    demographics = read_demographics(_resolve(ctx, Path(demo_file)))
    store_path = _resolve(ctx, Path(store_file))
    tag_store = read_store(store_path) if store_path.exists() else None
    state = ServiceState.assemble(
        forest=forest,
        vocab=vocab,
        demographics=demographics,
        tag_store=tag_store,
        config=ServiceConfig(floor=floor, default_k=k, default_n=n),
    )
    return StateHolder(state)


if __name__ == "__main__":
    main()
