"""Command-line entry points: stack import/check, replay, meshing, phantoms, serving."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace

import click

from . import phantoms
from .haptics import HapticConfig
from .mesh import export_stl, polygonize
from .server import GatewayServer
from .service import SessionService
from .session import SessionConfig, load_trajectory, run_session, write_trace
from .volume import Volume, export_stack, import_stack, read_stack_meta


def _fail(message: str) -> None:
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(1)


def _parse_triple(text: str, kind: type):
    parts = [p for p in text.replace("x", ",").split(",") if p]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise click.BadParameter(f"expected 1 or 3 comma-separated values, got {text!r}")
    return tuple(kind(p) for p in parts)


def _load_stack(stack_dir: str, spacing: str | None) -> Volume:
    if spacing is not None:
        sp = _parse_triple(spacing, float)
    else:
        meta = read_stack_meta(stack_dir)
        sp = tuple(meta["spacing_mm"]) if meta else (1.0, 1.0, 1.0)
    vol = import_stack(stack_dir, sp)
    meta = read_stack_meta(stack_dir)
    if meta and "origin_mm" in meta:
        vol.origin = tuple(float(c) for c in meta["origin_mm"])
    return vol


@click.group()
def cli() -> None:
    """Visuohaptic voxel-volume engine."""


@cli.command("import")
@click.argument("stack_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--spacing", default=None, help="Voxel spacing in mm, e.g. '1' or '1,1,2'.")
def import_cmd(stack_dir: str, spacing: str | None) -> None:
    """Validate a slice stack and print its dimensions."""
    try:
        vol = _load_stack(stack_dir, spacing)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    nx, ny, nz = vol.dims
    click.echo(f"dims {nx}x{ny}x{nz} spacing {vol.spacing} origin {vol.origin}")


@cli.command()
@click.argument("stack_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--trajectory", "-t", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--trace", "-o", "trace_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-stack", default=None, type=click.Path(file_okay=False))
@click.option("--out-stl", default=None, type=click.Path(dir_okay=False))
@click.option("--isovalue", default=0.5, show_default=True)
@click.option("--spacing", default=None)
@click.option("--stiffness", default=None, type=float, help="Spring stiffness in N/mm.")
@click.option("--iso", default=None, type=float, help="Solidity threshold on alpha.")
@click.option("--sample-radius", default=None, type=float, help="Luminosity sphere radius in mm.")
@click.option("--f-max", default=None, type=float, help="Output force clamp in N.")
@click.option("--probe-radius", default=1.5, show_default=True, type=float)
@click.option("--haptics/--no-haptics", default=True, show_default=True)
@click.option("--smoothing/--no-smoothing", default=True, show_default=True)
@click.option("--sculpt/--no-sculpt", default=True, show_default=True)
def replay(
    stack_dir: str,
    trajectory: str,
    trace_path: str,
    out_stack: str | None,
    out_stl: str | None,
    isovalue: float,
    spacing: str | None,
    stiffness: float | None,
    iso: float | None,
    sample_radius: float | None,
    f_max: float | None,
    probe_radius: float,
    haptics: bool,
    smoothing: bool,
    sculpt: bool,
) -> None:
    """Replay a JSONL trajectory against a stack; write the force trace CSV."""
    try:
        vol = _load_stack(stack_dir, spacing)
        frames = load_trajectory(trajectory)
        haptic = HapticConfig(haptics_enabled=haptics, smoothing_enabled=smoothing)
        overrides = {
            "stiffness_k": stiffness,
            "iso": iso,
            "sample_radius": sample_radius,
            "f_max": f_max,
        }
        haptic = replace(haptic, **{k: v for k, v in overrides.items() if v is not None})
        cfg = SessionConfig(haptic=haptic, sculpt_enabled=sculpt, probe_radius=probe_radius)
        trace, final_vol, regions = run_session(vol, frames, cfg)
        rows = write_trace(trace, trace_path)
        if out_stack:
            export_stack(final_vol, out_stack)
        if out_stl:
            export_stl(polygonize(final_vol, isovalue), out_stl)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(
        f"replayed {rows} ticks, {len(regions)} carve edits, "
        f"final revision {final_vol.revision}"
    )


@cli.command()
@click.argument("stack_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--isovalue", default=0.5, show_default=True)
@click.option("--spacing", default=None)
def mesh(stack_dir: str, out: str, isovalue: float, spacing: str | None) -> None:
    """Polygonize a stack's alpha field and write binary STL."""
    try:
        vol = _load_stack(stack_dir, spacing)
        count = export_stl(polygonize(vol, isovalue), out)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {count} triangles to {out}")


@cli.command()
@click.argument("kind", type=click.Choice(["halfspace", "sphere", "voxel"]))
@click.option("--dims", default="64", show_default=True, help="Grid size, e.g. '64' or '64,64,32'.")
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--r", "radius", default=20.0, show_default=True, help="Sphere radius in voxels.")
@click.option("--z0", default=None, type=int, help="Half-space fill height (default: whole grid).")
@click.option("--value", default=255, show_default=True, help="Channel value of solid voxels.")
@click.option("--soft/--hard", default=True, show_default=True, help="Anti-aliased sphere shell.")
@click.option("--spacing", default="1", show_default=True)
def phantom(
    kind: str,
    dims: str,
    out: str,
    radius: float,
    z0: int | None,
    value: int,
    soft: bool,
    spacing: str,
) -> None:
    """Generate an analytic test stack (half-space slab, sphere, or single voxel)."""
    try:
        d = _parse_triple(dims, int)
        sp = _parse_triple(spacing, float)
        if kind == "halfspace":
            vol = phantoms.halfspace(d, z0=z0, value=value, spacing=sp)
        elif kind == "sphere":
            vol = phantoms.sphere(d, radius, value=value, soft=soft, spacing=sp)
        else:
            vol = phantoms.single_voxel(d, value=value, spacing=sp)
        count = export_stack(vol, out)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {count} slices to {out}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--stack", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--spacing", default=None)
def serve(host: str, port: int, stack: str | None, spacing: str | None) -> None:
    """Run the WebSocket session service (MORPHO_PORT overrides --port)."""
    port = int(os.environ.get("MORPHO_PORT", port))
    volume = None
    try:
        if stack is not None:
            volume = _load_stack(stack, spacing)
        service = SessionService(volume=volume)
        server = GatewayServer(service, host=host, port=port)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"listening on ws://{host}:{port}", err=True)
    server.serve_forever()


def main() -> None:
    cli(prog_name="voxelhaptics")


if __name__ == "__main__":
    main()
