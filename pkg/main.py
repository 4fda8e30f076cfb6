# main.py
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from dotenv import load_dotenv
from loguru import logger
from rich.console import Console
from rich.table import Table

from errors import GeometryError, exit_code_for
from job_parser import JobParser
from models import canonical_json
from orchestrator import DispatchResult, Orchestrator
from settings import get_settings
from store import RecordStore

load_dotenv()

settings = get_settings()
logger.remove()
logger.add(sys.stderr, level=settings.LOG_LEVEL)

console = Console()

app = typer.Typer(help="Exact point, line and rational-curve computations on hypersurfaces over finite fields.",
                  no_args_is_help=True)
variety_app = typer.Typer(help="Point censuses, singularity probes and count windows.", no_args_is_help=True)
lines_app = typer.Typer(help="Lines on cubic surfaces and plane sections.", no_args_is_help=True)
chord_app = typer.Typer(help="Third-point maps, descent and Weil restriction.", no_args_is_help=True)
curves_app = typer.Typer(help="Rational curves: membership, splitting types, search.", no_args_is_help=True)
gallery_app = typer.Typer(help="Gallery hypersurfaces and the claim registry.", no_args_is_help=True)
app.add_typer(variety_app, name="variety")
app.add_typer(lines_app, name="lines")
app.add_typer(chord_app, name="chord")
app.add_typer(curves_app, name="curves")
app.add_typer(gallery_app, name="gallery")


class State:
    """Per-invocation overrides and the wired components."""

    budget: Optional[int] = None
    kmax: Optional[int] = None
    dmax: Optional[int] = None
    as_json: bool = False
    out: Optional[Path] = None
    orchestrator: Optional[Orchestrator] = None


state = State()


@app.callback()
def main(
    budget: Optional[int] = typer.Option(None, "--budget", help="Candidate budget for searches."),
    kmax: Optional[int] = typer.Option(None, "--kmax", help="Largest extension degree for singularity probes."),
    dmax: Optional[int] = typer.Option(None, "--dmax", help="Largest degree tried by descend-set-map."),
    store: Optional[Path] = typer.Option(None, "--store", help="Record store directory."),
    as_json: bool = typer.Option(False, "--json", help="Print canonical JSON on stdout."),
    out: Optional[Path] = typer.Option(None, "--out", help="Directory for census, curve and certificate files."),
):
    state.budget, state.kmax, state.dmax = budget, kmax, dmax
    state.as_json, state.out = as_json, out

    job_parser = JobParser(settings)
    logger.success("Job parser Initialized.")

    record_store = RecordStore(str(store or settings.STORE_DIR))
    logger.success("Record store Initialized.")

    state.orchestrator = Orchestrator(job_parser=job_parser, settings=settings, store=record_store)
    logger.success("Orchestrator Initialized.")


# ---------------------------------------------------------------------------
# running and rendering
# ---------------------------------------------------------------------------

def _scalar(value: Any) -> bool:
    return value is None or isinstance(value, (str, int, float, bool))


def _render(result: DispatchResult):
    payload = result.artifact.payload_data
    if state.as_json:
        typer.echo(canonical_json({
            "command": result.manifest.command,
            "outcome": result.outcome,
            "exit_code": result.exit_code,
            "manifest": result.manifest_key,
            "payload": payload,
            "error": result.artifact.error,
        }))
        return
    table = Table(title=f"{result.manifest.command}: {result.outcome}")
    table.add_column("key", style="cyan")
    table.add_column("value")
    for key in sorted(payload):
        value = payload[key]
        if _scalar(value):
            table.add_row(key, str(value))
        elif isinstance(value, list) and all(_scalar(v) for v in value) and len(value) <= 12:
            table.add_row(key, ", ".join(map(str, value)))
        elif isinstance(value, (list, dict)):
            table.add_row(key, f"<{len(value)} entries>")
    console.print(table)
    if result.artifact.error:
        err = result.artifact.error
        console.print(f"[red]{err['code']}[/red] {err['error']}: {err['message']}")
    if result.manifest_key:
        console.print(f"manifest {result.manifest_key[:16]}  exit {result.exit_code}")


def _write_files(result: DispatchResult):
    if state.out is None or not result.files:
        return
    state.out.mkdir(parents=True, exist_ok=True)
    for name, text in result.files.items():
        path = state.out / f"{name}.txt"
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")


def run(command: str, paths: Optional[Dict[str, Optional[Path]]] = None, **flags):
    """Parse, dispatch, render, and exit with the outcome's code."""
    orchestrator = state.orchestrator
    try:
        job = orchestrator.job_parser.parse_inputs(
            command, {role: str(p) if p else None for role, p in (paths or {}).items()}, flags)
        result = orchestrator.dispatch(job)
    except GeometryError as e:
        logger.error(f"Error running {command}: {str(e)}")
        if state.as_json:
            typer.echo(canonical_json({"command": command, "error": e.to_dict(),
                                       "exit_code": exit_code_for(e)}))
        else:
            console.print(f"[red]{e.code}[/red] {type(e).__name__}: {str(e)}")
        raise typer.Exit(exit_code_for(e))
    _write_files(result)
    _render(result)
    raise typer.Exit(result.exit_code)


# ---------------------------------------------------------------------------
# field / poly
# ---------------------------------------------------------------------------

@app.command("field")
def field_cmd(
    field: str = typer.Argument(..., help="Field literal, e.g. GF(4) or GF(2^2;1,1,1)."),
    embed_into: Optional[str] = typer.Option(None, "--embed-into", help="Report the embedding into this field."),
):
    """Construct a finite field and report its modulus and generator."""
    run("field", field=field, embed_into=embed_into)


@app.command("poly")
def poly_cmd(
    field: str = typer.Argument(..., help="Field literal."),
    text: str = typer.Argument(..., help="Homogeneous polynomial, e.g. 'x0^3 + x1^2*x2'."),
):
    """Parse and normalize a homogeneous form."""
    run("poly", field=field, text=text)


# ---------------------------------------------------------------------------
# variety
# ---------------------------------------------------------------------------

@variety_app.command("count")
def variety_count(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    m: int = typer.Option(1, "--m", help="Count over GF(q^m)."),
):
    """Enumerate X(GF(q^m))."""
    run("variety.count", {"surface": surface}, m=m)


@variety_app.command("probe")
def variety_probe(surface: Path = typer.Argument(..., exists=True, help="Hypersurface file.")):
    """Search for singular points over GF(q^m), m = 1..kmax."""
    run("variety.probe", {"surface": surface}, kmax=state.kmax)


@variety_app.command("windows")
def variety_windows(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    assume_smooth: bool = typer.Option(False, "--assume-smooth", help="Treat the Deligne-Weil window as binding."),
):
    """Compare the point count with the Chevalley-Warning and Deligne-Weil bounds."""
    run("variety.windows", {"surface": surface}, assume_smooth=assume_smooth or None)


# ---------------------------------------------------------------------------
# lines
# ---------------------------------------------------------------------------

@lines_app.command("census")
def lines_census(
    surface: Path = typer.Argument(..., exists=True, help="Cubic surface file."),
    m: int = typer.Option(1, "--m", help="Lines defined over GF(q^m)."),
    eckardt: bool = typer.Option(False, "--eckardt", help="Also report Eckardt points."),
):
    """All lines on X defined over GF(q^m)."""
    run("lines.census", {"surface": surface}, m=m, eckardt=eckardt or None)


@lines_app.command("through")
def lines_through(
    surface: Path = typer.Argument(..., exists=True, help="Cubic surface file."),
    point: str = typer.Option(..., "--point", help="Point of X, e.g. (0:0:0:1)."),
    ext: int = typer.Option(1, "--ext", help="Lines over GF(q^ext)."),
):
    """Lines on X through a point."""
    run("lines.through", {"surface": surface}, point=point, ext=ext)


@lines_app.command("classify")
def lines_classify(
    surface: Path = typer.Argument(..., exists=True, help="Cubic surface file."),
    plane: Optional[str] = typer.Option(None, "--plane", help="Linear form (a:b:c:d); omit for the full census."),
):
    """Classify one plane section, or census all rational planes."""
    run("lines.classify", {"surface": surface}, plane=plane)


# ---------------------------------------------------------------------------
# chord
# ---------------------------------------------------------------------------

@chord_app.command("third-point")
def chord_third_point(
    surface: Path = typer.Argument(..., exists=True, help="Cubic hypersurface file."),
    point: str = typer.Option(..., "--point", help="First point."),
    point2: str = typer.Option(..., "--point2", help="Second point."),
    ext: int = typer.Option(1, "--ext", help="Points over GF(q^ext)."),
):
    """Third intersection of the line through two points with X."""
    run("chord.third-point", {"surface": surface}, point=point, point2=point2, ext=ext)


@chord_app.command("descend")
def chord_descend(
    surface: Path = typer.Argument(..., exists=True, help="Cubic hypersurface over GF(q)."),
    phi2: Path = typer.Argument(..., exists=True, help="Curve file over GF(q^2)."),
):
    """Compose a GF(q^2)-curve with its conjugate through the third-point map."""
    run("chord.descend", {"surface": surface, "phi2": phi2})


@chord_app.command("descend-set-map")
def chord_descend_set_map(
    surface: Path = typer.Argument(..., exists=True, help="Cubic hypersurface over GF(q)."),
    table: Path = typer.Argument(..., exists=True, help="Table file of t -> x rows."),
    allow_constant: bool = typer.Option(False, "--allow-constant", help="Accept a constant lift."),
):
    """Extend a set map P^1(GF(q)) -> X(GF(q)) to a morphism over GF(q)."""
    run("chord.descend-set-map", {"surface": surface, "table": table},
        dmax=state.dmax, budget=state.budget, allow_constant=allow_constant or None)


@chord_app.command("weil-restrict")
def chord_weil_restrict(
    q: int = typer.Option(..., "--q", help="Odd prime power."),
    a: str = typer.Option(..., "--a", help="Non-square element of GF(q)."),
):
    """Quadric model of the Weil restriction of P^1 from GF(q^2) to GF(q)."""
    run("chord.weil-restrict", q=q, a=a)


@chord_app.command("verify-certificate")
def chord_verify_certificate(
    surface: Path = typer.Argument(..., exists=True, help="Cubic hypersurface file."),
    certificate: Path = typer.Argument(..., exists=True, help="Certificate JSON."),
):
    """Re-run every check of a descent certificate."""
    run("chord.verify-certificate", {"surface": surface, "certificate": certificate})


@chord_app.command("unirational")
def chord_unirational(
    surface: Path = typer.Argument(..., exists=True, help="Smooth cubic surface file."),
    point: str = typer.Option(..., "--point", help="First rational point."),
    point2: str = typer.Option(..., "--point2", help="Second rational point."),
    samples: Optional[int] = typer.Option(None, "--samples", help="Dominance sample budget."),
):
    """Chord map of the tangent plane cubics at two points, with a dominance certificate."""
    run("chord.unirational", {"surface": surface}, point=point, point2=point2, samples=samples)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

@curves_app.command("verify")
def curves_verify(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    curve: Path = typer.Argument(..., exists=True, help="Curve file."),
):
    """Check that F(f) vanishes identically."""
    run("curves.verify", {"surface": surface, "curve": curve})


@curves_app.command("splitting")
def curves_splitting(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    curve: Path = typer.Argument(..., exists=True, help="Curve file."),
):
    """Splitting type of the pulled-back tangent bundle."""
    run("curves.splitting", {"surface": surface, "curve": curve})


@curves_app.command("search")
def curves_search(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    degree: int = typer.Option(..., "--degree", help="Curve degree."),
    through: List[str] = typer.Option([], "--through", help="Constraint t=x, e.g. '(0:1)=(0:0:0:1)'."),
    limit: int = typer.Option(16, "--limit", help="Stop after this many curves."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed."),
    no_structured: bool = typer.Option(False, "--no-structured", help="Skip line/conic/cubic constructions."),
):
    """Rational curves of a given degree on X, with a Found/Exhausted/BudgetReached marker."""
    run("curves.search", {"surface": surface}, degree=degree, through=through, limit=limit, seed=seed,
        budget=state.budget, no_structured=no_structured or None)


@curves_app.command("interpolate")
def curves_interpolate(
    field: str = typer.Option(..., "--field", help="Base field literal."),
    degree: int = typer.Option(..., "--degree", help="Interpolation degree."),
    through: List[str] = typer.Option(..., "--through", help="Constraint t=x."),
    ext: int = typer.Option(1, "--ext", help="Read constraint points over GF(q^ext)."),
):
    """A curve P^1 -> P^n through the prescribed values."""
    run("curves.interpolate", field=field, degree=degree, through=through, ext=ext)


@curves_app.command("equations")
def curves_equations(
    surface: Path = typer.Argument(..., exists=True, help="Hypersurface file."),
    degree: int = typer.Option(..., "--degree", help="Curve degree."),
):
    """Size of the membership and degeneracy system for degree-d curves."""
    run("curves.equations", {"surface": surface}, degree=degree)


# ---------------------------------------------------------------------------
# gallery
# ---------------------------------------------------------------------------

@gallery_app.command("build")
def gallery_build(identifier: str = typer.Argument(..., help="Gallery id, e.g. SD or BOTHMER(3).")):
    """Build a gallery hypersurface; --out writes its file."""
    run("gallery.build", id=identifier)


@gallery_app.command("verify")
def gallery_verify(
    claim: Optional[str] = typer.Argument(None, help="Claim id, e.g. SD_unique_point or NORM_unique(2,3)."),
    all_claims: bool = typer.Option(False, "--all", help="Run every registered claim."),
):
    """Verify one claim or the whole registry."""
    run("gallery.verify", claim=claim, all=all_claims or None)


@gallery_app.command("search")
def gallery_search(
    q: int = typer.Option(..., "--q", help="Base field order."),
    m: int = typer.Option(..., "--m", help="Projective dimension."),
    tries: int = typer.Option(10, "--tries", help="Random ideal elements to try."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed."),
):
    """Search twisted norm hypersurfaces with one rational point and no singular point found."""
    run("gallery.search", q=q, m=m, tries=tries, seed=seed, kmax=state.kmax)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

@app.command("replay")
def replay(manifest: str = typer.Argument(..., help="Manifest digest or unique prefix.")):
    """Re-execute a stored run and compare its records bit-exactly."""
    try:
        result = state.orchestrator.replay(manifest)
    except GeometryError as e:
        logger.error(f"Error replaying {manifest}: {str(e)}")
        console.print(f"[red]{e.code}[/red] {type(e).__name__}: {str(e)}")
        raise typer.Exit(exit_code_for(e))
    result.manifest_key = manifest
    _render(result)
    raise typer.Exit(result.exit_code)


if __name__ == "__main__":
    app()
