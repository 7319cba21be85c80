"""Command-line front end: headless runs with exports, and the live server."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import load_run_config, load_schedule
from .errors import ConfigError, VoxsteerError
from .exports import HistoryWriter, export_vtk, render_convergence, render_density
from .frames import encode_frame
from .session import FINISHED, STOPPED, Session

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


@click.group()
def main():
    """Interactive voxel topology optimization."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config JSON.")
@click.option("--schedule", "schedule_path", type=click.Path(), help="Mutation schedule JSON.")
@click.option("--out", "out_dir", type=click.Path(), help="Output directory (overrides config).")
@click.option("--seed", type=int, default=0, help="Reserved; the pipeline is deterministic.")
@click.option("--threads", type=int, default=1, show_default=True, help="BLAS thread cap; 1 keeps runs bitwise reproducible.")
@click.option("--no-figures", is_flag=True, help="Skip the matplotlib report figures.")
def run(config_path, schedule_path, out_dir, seed, threads, no_figures):
    """Run a configured problem to completion and export the results."""
    try:
        cfg = load_run_config(config_path)
        schedule = load_schedule(schedule_path) if schedule_path else []
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    out = Path(out_dir) if out_dir else Path(cfg.out_dir)
    limiter = _thread_limiter(threads)
    with limiter:
        code = _run_session(cfg, schedule, out, not no_figures)
    sys.exit(code)


def _thread_limiter(threads: int):
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=max(1, threads))
    except ImportError:
        import contextlib

        return contextlib.nullcontext()


def _run_session(cfg, schedule, out: Path, figures: bool) -> int:
    out.mkdir(parents=True, exist_ok=True)
    session = Session(cfg.domain, cfg.elem_size, cfg.params, cfg.bcs)
    for k, cmd in schedule:
        session.submit(cmd, apply_at=k)

    history_writer = HistoryWriter(out / "history.csv") if "csv" in cfg.formats else None
    volumes: list[float] = []

    def on_iter(state, report):
        volumes.append(report.volume)
        if history_writer:
            history_writer.write(report)
        click.echo(
            f"it {report.iter:4d}  obj {report.compliance:.6e}  "
            f"vol {report.volume:.4f}  ch {report.change:.4f}  "
            f"cg {report.solver_iterations}"
        )

    session.on_iteration.append(on_iter)
    try:
        session.run_blocking()
    except VoxsteerError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        if history_writer:
            history_writer.close()
        return EXIT_SOLVER
    finally:
        if history_writer:
            history_writer.close()

    snap = session.latest_snapshot()
    field = session.state.field
    if "vtk" in cfg.formats:
        export_vtk(field.x_phys, session.mesh, out / "density.vtk", origin=cfg.domain.position)
    if "frame" in cfg.formats:
        frame = encode_frame(snap.iter, session.mesh.shape, field.x_phys, field.passive_void)
        (out / "density.frame").write_bytes(frame)
    if figures and ("png" in cfg.formats or "csv" in cfg.formats):
        if snap.history:
            render_convergence(snap.history, volumes, out / "convergence.png")
        render_density(field.x_phys, session.mesh, out / "density.png")
    (out / "recording.json").write_text(json.dumps(session.recording(), indent=2) + "\n")

    click.echo(f"{snap.phase} after {snap.iter} iteration(s); outputs in {out}")
    return EXIT_OK if snap.phase in (FINISHED, STOPPED) else EXIT_SOLVER


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8732, show_default=True, type=int)
def serve(host, port):
    """Serve the live WebSocket API (endpoint /session)."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
