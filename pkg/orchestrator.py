import json
import time
from dataclasses import asdict, dataclass, field as dc_field
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional, Tuple

from loguru import logger

from chord import (
    descend,
    descend_set_map,
    third_point,
    unirational_map_surface,
    verify_certificate,
    weil_restrict_p1,
)
from curvespace import FOUND, hom_equations, interpolate_to_Pn, pullback_splitting, search_curves, verify_member
from errors import (
    EXIT_INFEASIBLE,
    EXIT_NEGATIVE,
    EXIT_SUCCESS,
    ExtensionSearchExhausted,
    GeometryError,
    ReplayMismatch,
    ValidationError,
)
from gallery import build, run_registry, search_one_point, verify_claim
from gf import FiniteField, embedding, field_of_order, format_element, format_field, parse_element, parse_field
from incidence import (
    classify_plane_section,
    eckardt_points,
    lines_on,
    lines_through_point,
    plane_section_census,
)
from job_parser import (
    census_text,
    certificate_to_dict,
    curve_to_dict,
    format_point,
    point_row,
    write_curve,
    write_hypersurface,
)
from models import (
    FAIL,
    INFEASIBLE,
    INFEASIBLE_RUN,
    NEGATIVE,
    PASS,
    SUCCESS,
    ArtifactRecord,
    InputRecord,
    Job,
    Record,
    RunManifest,
    canonical_json,
)
from mpoly import format_poly
from projvar import INFEASIBLE as PROBE_INFEASIBLE, NONE_FOUND, count_windows, enumerate_points, singular_locus_probe

if TYPE_CHECKING:
    from job_parser import JobParser
    from settings import Settings
    from store import RecordStore

EXIT_CODES = {SUCCESS: EXIT_SUCCESS, NEGATIVE: EXIT_NEGATIVE, INFEASIBLE_RUN: EXIT_INFEASIBLE}

Handled = Tuple[str, Dict[str, Any], Dict[str, str], List[Record]]


def _jsonable(data: Any) -> Any:
    """Plain JSON values: tuples become lists, non-string keys become strings."""
    return json.loads(json.dumps(data, default=str))


def _line_rows(line) -> List[List]:
    return [[format_element(line.field, c) if line.field.k > 1 else c for c in row] for row in line.rows]


@dataclass
class DispatchResult:
    exit_code: int
    outcome: str
    artifact: ArtifactRecord
    manifest: RunManifest
    files: Dict[str, str] = dc_field(default_factory=dict)
    records: List[Record] = dc_field(default_factory=list)
    manifest_key: Optional[str] = None


class Orchestrator:
    def __init__(
        self,
        job_parser: 'JobParser',
        settings: 'Settings',
        store: Optional['RecordStore'] = None,
    ):
        self.job_parser = job_parser
        self.settings = settings
        self.store = store

        # command name -> handler
        self.available_commands: Dict[str, Callable[[Job], Handled]] = {
            "field": self._field,
            "poly": self._poly,
            "variety.count": self._variety_count,
            "variety.probe": self._variety_probe,
            "variety.windows": self._variety_windows,
            "lines.census": self._lines_census,
            "lines.through": self._lines_through,
            "lines.classify": self._lines_classify,
            "chord.third-point": self._third_point,
            "chord.descend": self._descend,
            "chord.descend-set-map": self._descend_set_map,
            "chord.weil-restrict": self._weil_restrict,
            "chord.verify-certificate": self._verify_certificate,
            "chord.unirational": self._unirational,
            "curves.verify": self._curves_verify,
            "curves.splitting": self._curves_splitting,
            "curves.search": self._curves_search,
            "curves.interpolate": self._curves_interpolate,
            "curves.equations": self._curves_equations,
            "gallery.build": self._gallery_build,
            "gallery.verify": self._gallery_verify,
            "gallery.search": self._gallery_search,
        }

    # ------------------------------------------------------------------
    # dispatch and replay
    # ------------------------------------------------------------------
    def dispatch(self, job: Job, record: bool = True) -> DispatchResult:
        """
        Run one job and emit its manifest

        Args:
            job (Job): a validated job from the parser
            record (bool): write inputs, records and the manifest to the store

        Returns:
            DispatchResult: exit code 0 success, 1 honest negative, 2 infeasible
        """
        handler = self.available_commands.get(job.command)
        if handler is None:
            raise ValidationError(f"no handler for {job.command}")
        started = time.time()
        files: Dict[str, str] = {}
        extra: List[Record] = []
        error = None
        try:
            outcome, payload, files, extra = handler(job)
        except GeometryError as e:
            logger.error(f"Error executing {job.command}: {str(e)}")
            outcome = NEGATIVE if e.category == NEGATIVE else INFEASIBLE_RUN
            payload, error = {}, e.to_dict()
        artifact = ArtifactRecord(command=job.command, outcome=outcome,
                                  payload_data=_jsonable(payload), error=error)
        sources = job.objects.get("sources", {})
        inputs = {role: InputRecord(path=path, text=text) for role, (path, text) in sources.items()}
        manifest = RunManifest(
            command=job.command,
            parameters=_jsonable(job.parameters),
            input_digests={role: rec.digest for role, rec in inputs.items()},
            fields=self._fields(job),
            wall_time=round(time.time() - started, 3),
            outcome=outcome,
            exit_code=EXIT_CODES[outcome],
            artifacts=[artifact.digest] + [r.digest for r in extra],
        )
        result = DispatchResult(manifest.exit_code, outcome, artifact, manifest, files, extra)
        if record and self.store is not None:
            for rec in list(inputs.values()) + extra + [artifact]:
                self.store.append(rec)
            result.manifest_key = self.store.append(manifest)
        logger.info(f"{job.command}: {outcome} (exit {manifest.exit_code}) in {manifest.wall_time:.2f}s")
        return result

    def replay(self, key: str) -> DispatchResult:
        """
        Re-execute a stored manifest and compare its records bit-exactly

        Raises:
            ReplayMismatch: a stored record was edited, or the rerun differs
        """
        if self.store is None:
            raise ValidationError("replay needs a store")
        manifest = RunManifest(**self.store.get(key))
        for digest in manifest.artifacts:
            self.store.get(digest)
        sources = {}
        for role, digest in manifest.input_digests.items():
            rec = InputRecord(**self.store.get(digest))
            sources[role] = (rec.path, rec.text)
        job = self.job_parser.parse_job(manifest.command, sources, manifest.parameters)
        result = self.dispatch(job, record=False)
        if result.exit_code != manifest.exit_code or result.manifest.artifacts != manifest.artifacts:
            raise ReplayMismatch(
                f"replay of {manifest.command} gave {result.outcome} with artifacts "
                f"{[d[:12] for d in result.manifest.artifacts]}, stored {manifest.outcome} with "
                f"{[d[:12] for d in manifest.artifacts]}")
        logger.success(f"Replay of {manifest.command} matches ({manifest.outcome})")
        return result

    @staticmethod
    def _fields(job: Job) -> List[str]:
        names = set()
        for obj in job.objects.values():
            field = obj if isinstance(obj, FiniteField) else getattr(obj, "field", None)
            if isinstance(field, FiniteField):
                names.add(format_field(field))
        return sorted(names)

    def _int(self, job: Job, name: str, default: Optional[int] = None) -> Optional[int]:
        value = job.parameters.get(name, default)
        return None if value is None else int(value)

    # ------------------------------------------------------------------
    # field / poly
    # ------------------------------------------------------------------
    def _field(self, job: Job) -> Handled:
        F = job.objects["field"]
        payload = {"field": format_field(F), "p": F.p, "k": F.k, "q": F.q,
                   "modulus": list(F.modulus), "generator": format_element(F, F.generator)}
        if "embed_into" in job.parameters:
            target = parse_field(str(job.parameters["embed_into"]))
            emb = embedding(F, target)
            payload["embedding"] = {"target": format_field(target),
                                    "image_of_generator": format_element(target, emb(F.generator))}
        return SUCCESS, payload, {}, []

    def _poly(self, job: Job) -> Handled:
        P = job.objects["poly"]
        payload = {"field": format_field(P.field), "nvars": P.nvars, "degree": P.degree,
                   "terms": len(P.terms), "text": format_poly(P)}
        return SUCCESS, payload, {}, []

    # ------------------------------------------------------------------
    # variety
    # ------------------------------------------------------------------
    def _variety_count(self, job: Job) -> Handled:
        X = job.objects["surface"]
        m = self._int(job, "m", 1)
        census = enumerate_points(X, m, n_jobs=self.settings.N_JOBS)
        header = {"kind": "points", "field": format_field(census.field), "m": m, "count": census.count}
        payload = dict(header, points=[format_point(p) for p in census.points])
        return SUCCESS, payload, {"census": census_text(header, [point_row(p) for p in census.points])}, []

    def _variety_probe(self, job: Job) -> Handled:
        X = job.objects["surface"]
        report = singular_locus_probe(X, kmax=self._int(job, "kmax", self.settings.KMAX),
                                      n_jobs=self.settings.N_JOBS)
        payload = {"verdict": report.verdict, "searched_up_to": report.searched_up_to, "kmax": report.kmax,
                   "note": report.note,
                   "singular_points": {m: [format_point(p) for p in pts]
                                       for m, pts in report.singular_points.items()}}
        outcome = INFEASIBLE_RUN if report.verdict == PROBE_INFEASIBLE else SUCCESS
        return outcome, payload, {}, []

    def _variety_windows(self, job: Job) -> Handled:
        X = job.objects["surface"]
        windows = count_windows(X, assume_smooth=bool(job.parameters.get("assume_smooth", False)))
        # a failed window only refutes something once smoothness is asserted
        holds = windows.cw_pass is not False and (windows.dw_conditional or windows.dw_pass)
        return (SUCCESS if holds else NEGATIVE), asdict(windows), {}, []

    # ------------------------------------------------------------------
    # lines
    # ------------------------------------------------------------------
    def _lines_census(self, job: Job) -> Handled:
        X = job.objects["surface"]
        m = self._int(job, "m", 1)
        lines = lines_on(X, m, n_jobs=self.settings.N_JOBS)
        field = lines[0].field if lines else X.field
        header = {"kind": "lines", "field": format_field(field), "m": m, "count": len(lines)}
        payload = dict(header, lines=[_line_rows(L) for L in lines])
        if job.parameters.get("eckardt"):
            payload["eckardt_points"] = [format_point(p) for p in eckardt_points(X, m)]
        rows = [canonical_json(_line_rows(L)) for L in lines]
        return SUCCESS, payload, {"census": census_text(header, rows)}, []

    def _lines_through(self, job: Job) -> Handled:
        X = job.objects["surface"]
        p = job.objects["point"]
        m = self._int(job, "ext", 1)
        lines = lines_through_point(X, p, m)
        return SUCCESS, {"point": format_point(p), "count": len(lines),
                         "lines": [_line_rows(L) for L in lines]}, {}, []

    def _lines_classify(self, job: Job) -> Handled:
        X = job.objects["surface"]
        if "plane" in job.objects:
            section = classify_plane_section(X, job.objects["plane"])
            payload = {"kind": section.kind, "conjugate_triple": section.conjugate_triple,
                       "concurrent": section.concurrent,
                       "lines": [{"rows": _line_rows(l.line), "field_degree": l.field_degree,
                                  "multiplicity": l.multiplicity} for l in section.lines]}
            return SUCCESS, payload, {}, []
        census = plane_section_census(X)
        payload = asdict(census)
        payload["line_bound_holds"] = census.line_bound_holds
        return (SUCCESS if census.line_bound_holds else NEGATIVE), payload, {}, []

    # ------------------------------------------------------------------
    # chord
    # ------------------------------------------------------------------
    def _third_point(self, job: Job) -> Handled:
        X = job.objects["surface"]
        p, p2 = job.objects["point"], job.objects["point2"]
        r = third_point(X, p, p2)
        return SUCCESS, {"p": format_point(p), "p2": format_point(p2), "third": format_point(r)}, {}, []

    def _descend(self, job: Job) -> Handled:
        X = job.objects["surface"]
        phi = descend(X, job.objects["phi2"])
        return SUCCESS, {"phi": curve_to_dict(phi)}, {"curve": write_curve(phi)}, []

    def _descend_set_map(self, job: Job) -> Handled:
        X = job.objects["surface"]
        field, table = job.objects["table"]
        if field != X.field:
            raise ValidationError(f"table over {format_field(field)}, surface over {format_field(X.field)}")
        try:
            certificate = descend_set_map(
                X, table,
                dmax=self._int(job, "dmax"),
                allow_constant=bool(job.parameters.get("allow_constant", False)),
                budget=self._int(job, "budget"),
                n_jobs=self.settings.N_JOBS,
            )
        except ExtensionSearchExhausted as e:
            logger.error(f"Error executing {job.command}: {str(e)}")
            partial = certificate_to_dict(e.certificate)
            return NEGATIVE, {"certificate": partial, "error": e.to_dict()}, \
                {"certificate": canonical_json(partial)}, []
        data = certificate_to_dict(certificate)
        return SUCCESS, {"certificate": data}, {"certificate": canonical_json(data)}, []

    def _weil_restrict(self, job: Job) -> Handled:
        K = field_of_order(int(job.parameters["q"]))
        a = parse_element(K, str(job.parameters["a"]))
        model = weil_restrict_p1(K, a)
        count = len(model.points())
        payload = {"base": format_field(model.base), "ext": format_field(model.ext),
                   "a": format_element(K, a), "sqrt_a": format_element(model.ext, model.sqrt_a),
                   "equation": format_poly(model.equation), "points": count,
                   "expected_points": K.q * K.q + 1}
        return (SUCCESS if count == K.q * K.q + 1 else NEGATIVE), payload, {}, []

    def _verify_certificate(self, job: Job) -> Handled:
        X = job.objects["surface"]
        check = verify_certificate(X, job.objects["certificate"])
        payload = {"checks": check.checks, "match": check.match, "failures": check.failures}
        return (SUCCESS if check.match else NEGATIVE), payload, {}, []

    def _unirational(self, job: Job) -> Handled:
        X = job.objects["surface"]
        umap = unirational_map_surface(X, job.objects["point"], job.objects["point2"],
                                       samples=self._int(job, "samples"))
        cert = umap.certificate
        payload = {"bidegree": list(umap.bidegree),
                   "coords": [format_poly(f) for f in umap.coords],
                   "tangent_curves": [curve_to_dict(f) for f in umap.tangent_curves],
                   "certificate": {"field": format_field(cert.field),
                                   "parameters": [format_element(cert.field, c) for c in cert.parameters],
                                   "rank": cert.rank, "examined": cert.examined}}
        return SUCCESS, payload, {}, []

    # ------------------------------------------------------------------
    # curves
    # ------------------------------------------------------------------
    def _curves_verify(self, job: Job) -> Handled:
        member = verify_member(job.objects["surface"], job.objects["curve"])
        return (SUCCESS if member else NEGATIVE), {"member": member}, {}, []

    def _curves_splitting(self, job: Job) -> Handled:
        split = pullback_splitting(job.objects["surface"], job.objects["curve"])
        payload = asdict(split)
        payload.update(total=split.total, is_free=split.is_free, is_very_free=split.is_very_free,
                       routes_agree=split.routes_agree)
        return SUCCESS, payload, {}, []

    def _curves_search(self, job: Job) -> Handled:
        X = job.objects["surface"]
        result = search_curves(
            X, self._int(job, "degree"), job.objects.get("through", []),
            budget=self._int(job, "budget"),
            limit=self._int(job, "limit", 16),
            seed=self._int(job, "seed"),
            n_jobs=self.settings.N_JOBS,
            structured=not job.parameters.get("no_structured", False),
        )
        payload = {"degree": result.degree, "marker": result.marker, "strategy": result.strategy,
                   "examined": result.examined, "space": result.space,
                   "curves": [curve_to_dict(f) for f in result.curves]}
        files = {"curves": "".join(write_curve(f) + "\n" for f in result.curves)} if result.curves else {}
        return (SUCCESS if result.marker == FOUND else NEGATIVE), payload, files, []

    def _curves_interpolate(self, job: Job) -> Handled:
        f = interpolate_to_Pn(job.objects["field"], job.objects["through"], self._int(job, "degree"))
        return SUCCESS, {"curve": curve_to_dict(f)}, {"curve": write_curve(f)}, []

    def _curves_equations(self, job: Job) -> Handled:
        system = hom_equations(job.objects["surface"], self._int(job, "degree"))
        payload = {"degree": system.degree, "ambient": system.ambient, "variables": system.variables,
                   "equations": len(system.equations),
                   "degeneracy_matrix": f"{len(system.degeneracy)}x{len(system.degeneracy)}"}
        return SUCCESS, payload, {}, []

    # ------------------------------------------------------------------
    # gallery
    # ------------------------------------------------------------------
    def _gallery_build(self, job: Job) -> Handled:
        entry = build(str(job.parameters["id"]))
        payload = {"identifier": entry.identifier, "provenance": entry.provenance,
                   "points": [format_point(p) for p in entry.points],
                   "parameters": entry.parameters,
                   "equation": format_poly(entry.surface.equation)}
        return SUCCESS, payload, {"surface": write_hypersurface(entry.surface)}, []

    def _gallery_verify(self, job: Job) -> Handled:
        if job.parameters.get("all"):
            records = run_registry(n_jobs=self.settings.N_JOBS)
        elif "claim" in job.parameters:
            records = [verify_claim(str(job.parameters["claim"]))]
        else:
            raise ValidationError("gallery verify needs a claim id or --all")
        outcomes = {r.outcome for r in records}
        if FAIL in outcomes:
            outcome = NEGATIVE
        elif INFEASIBLE in outcomes:
            outcome = INFEASIBLE_RUN
        else:
            outcome = SUCCESS
        payload = {"claims": [{"claim_id": r.claim_id, "anchor": r.anchor, "outcome": r.outcome,
                               "actual": r.actual, "expected": r.expected, "reason": r.reason} for r in records],
                   "passed": sum(r.outcome == PASS for r in records), "total": len(records)}
        return outcome, payload, {}, list(records)

    def _gallery_search(self, job: Job) -> Handled:
        found = search_one_point(self._int(job, "q"), self._int(job, "m"),
                                 tries=self._int(job, "tries", 10), seed=self._int(job, "seed"),
                                 kmax=self._int(job, "kmax", 1))
        payload = {"candidates": [{"identifier": c.entry.identifier, "count": c.count, "probe": c.probe,
                                   "equation": format_poly(c.entry.surface.equation)} for c in found]}
        smooth = any(c.probe == NONE_FOUND for c in found)
        return (SUCCESS if smooth else NEGATIVE), payload, {}, []
