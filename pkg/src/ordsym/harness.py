"""Verification pipelines: configuration, caching, checks, JSON reports.

The three theorem-level checks are rank duality (ordinary cohomology has
twice the Hecke-algebra rank, with perfect duality pairing), the control
theorem (layer modules are free and trace induces the base-change
isomorphism), and unit-root stabilization (T(p) acts on the ordinary old
part by the Frobenius unit root). A content-addressed JSON cache stores the
expensive lattice-coordinate operator matrices; cache corruption is detected
by hash and repaired by rebuild. Reports are versioned JSON and
deterministic apart from timing fields.
"""

import csv
import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass
from math import gcd

from . import __version__
from .exactlin import IntMatrix, Lattice, solve_mod
from .hecke import HeckeAlgebra, diamond, hecke_T, restrict_operator, trace_map
from .iwasawa import control_check, freeness_rank, make_lambda_ring, module_from_action
from .modsym import LevelParams, SymbolSpace, build_space, cuspidal_lattice, genus
from .ordinary import (
    OrdinaryDecomposition,
    eigen_packets,
    hida_idempotent,
    lattice_operator,
    ordinary_summand,
    qexp_basis,
    stabilization_check,
    summand_operator,
)

REPORT_SCHEMA = "ordsym-report/1"
CACHE_SCHEMA = "ordsym-cache/1"
# bump when a math-bearing module changes meaning; invalidates cached matrices
CODE_TAG = f"ordsym-{__version__}"

CHECK_NAMES = ("rank_duality", "control", "stabilization")

# extra p-adic digits carried internally so reported digits survive the
# precision loss of congruent-system refinement
PRECISION_BUFFER = 8


class HarnessError(RuntimeError):
    """Configuration or pipeline orchestration failure."""


@dataclass(frozen=True)
class VerificationConfig:
    """What to verify: instances (N, p, r_max), precision, operators, cache."""

    instances: tuple = ((5, 3, 2), (1, 11, 1), (11, 3, 1))
    precision: int = 20
    n_max: int = 12
    cache_dir: str | None = None
    oracle: str | None = None
    checks: tuple = CHECK_NAMES

    def __post_init__(self):
        for inst in self.instances:
            n, p, r_max = inst
            if gcd(n, p) != 1:
                raise HarnessError(f"instance {inst}: tame level must be prime to p")
            if n * p <= 4:
                raise HarnessError(f"instance {inst}: Np must exceed 4")
            if r_max < 1:
                raise HarnessError(f"instance {inst}: need r_max >= 1")
        if self.precision < 2:
            raise HarnessError("precision must be at least 2")
        for name in self.checks:
            if name not in CHECK_NAMES:
                raise HarnessError(f"unknown check {name!r}")

    @property
    def internal_precision(self) -> int:
        return self.precision + PRECISION_BUFFER

    def to_json_dict(self) -> dict:
        return {
            "instances": [list(inst) for inst in self.instances],
            "precision": self.precision,
            "n_max": self.n_max,
            "oracle": self.oracle,
            "checks": list(self.checks),
        }


@dataclass
class Pipeline:
    """Built objects for one level: space, decomposition, Hecke algebra."""

    params: LevelParams
    space: SymbolSpace
    dec: OrdinaryDecomposition
    algebra: HeckeAlgebra
    from_cache: bool


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _content_hash(obj) -> str:
    return hashlib.sha256(_canonical_json(obj).encode()).hexdigest()


def _atomic_write_json(path: str, obj: dict) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(obj, handle, sort_keys=True, indent=1)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class MatrixCache:
    """Content-addressed store of per-level pipeline matrices.

    A blob holds the cuspidal lattice, the projector, and the
    lattice-coordinate T(n) matrices for one (N, p, r, k, n_max). The key is
    the hash of those parameters plus the code tag; the payload carries its
    own content hash, so corruption is detected on load and repaired by
    rebuilding.
    """

    def __init__(self, root: str):
        self.root = root

    def _path(self, key: dict) -> str:
        return os.path.join(self.root, f"{_content_hash(key)[:32]}.json")

    @staticmethod
    def key(params: LevelParams, k: int, n_max: int) -> dict:
        return {
            "n": params.n,
            "p": params.p,
            "r": params.r,
            "k": k,
            "n_max": n_max,
            "code": CODE_TAG,
        }

    def load(self, key: dict) -> dict | None:
        path = self._path(key)
        try:
            with open(path) as handle:
                blob = json.load(handle)
        except (OSError, ValueError):
            return None
        if blob.get("schema") != CACHE_SCHEMA or blob.get("key") != key:
            return None
        payload = blob.get("payload")
        if payload is None or _content_hash(payload) != blob.get("content_hash"):
            return None
        return payload

    def store(self, key: dict, payload: dict) -> None:
        blob = {
            "schema": CACHE_SCHEMA,
            "key": key,
            "content_hash": _content_hash(payload),
            "payload": payload,
        }
        _atomic_write_json(self._path(key), blob)


class VerificationSession:
    """Pipelines shared across checks, with the matrix cache underneath."""

    def __init__(self, config: VerificationConfig):
        self.config = config
        self.cache = MatrixCache(config.cache_dir) if config.cache_dir else None
        self._pipelines: dict[tuple[int, int, int], Pipeline] = {}

    def pipeline(self, n: int, p: int, r: int) -> Pipeline:
        key = (n, p, r)
        if key in self._pipelines:
            return self._pipelines[key]
        params = LevelParams(n, p, r)
        k = self.config.internal_precision
        n_max = self.config.n_max
        space = build_space(params)
        cache_key = MatrixCache.key(params, k, n_max) if self.cache else None
        payload = self.cache.load(cache_key) if self.cache else None
        from_cache = payload is not None

        if payload is not None:
            lattice = Lattice.from_json_dict(payload["lattice"])
            e = IntMatrix.from_json_dict(payload["e"])
            ops = {int(s): IntMatrix.from_json_dict(m) for s, m in payload["ops"].items()}
        else:
            lattice = cuspidal_lattice(space)
            ops = {
                m: restrict_operator(hecke_T(space, m), lattice) for m in range(1, n_max + 1)
            }
            e = hida_idempotent(ops[p], p, k)

        dec = ordinary_summand(
            lattice, e, p, k, u=ops[p], space=space, level=space.level
        )
        dec.op_cache.update(ops)
        gens = [summand_operator(dec, ops[m]) for m in range(1, n_max + 1)]
        algebra = HeckeAlgebra(gens, p, k)

        if self.cache and payload is None:
            self.cache.store(
                cache_key,
                {
                    "lattice": lattice.to_json_dict(),
                    "e": e.to_json_dict(),
                    "ops": {str(m): mat.to_json_dict() for m, mat in ops.items()},
                },
            )
        pipe = Pipeline(params=params, space=space, dec=dec, algebra=algebra, from_cache=from_cache)
        self._pipelines[key] = pipe
        return pipe

    def flush_cache(self) -> None:
        """Write back operator matrices discovered after the initial build.

        Duality checks extend the operator range past n_max; persisting the
        memo makes warm runs skip that recomputation too.
        """
        if not self.cache:
            return
        k = self.config.internal_precision
        for pipe in self._pipelines.values():
            cache_key = MatrixCache.key(pipe.params, k, self.config.n_max)
            stored = self.cache.load(cache_key)
            if stored is not None and len(stored["ops"]) >= len(pipe.dec.op_cache):
                continue
            self.cache.store(
                cache_key,
                {
                    "lattice": pipe.dec.lattice.to_json_dict(),
                    "e": pipe.dec.e.to_json_dict(),
                    "ops": {str(m): mat.to_json_dict() for m, mat in pipe.dec.op_cache.items()},
                },
            )


def _entry(instance, check: str, ok: bool, precision: int, data: dict, seconds: float) -> dict:
    return {
        "instance": list(instance),
        "check": check,
        "ok": bool(ok),
        "precision": precision,
        "data": data,
        "seconds": round(seconds, 3),
    }


def check_rank_duality(session: VerificationSession, instance) -> list[dict]:
    """Ordinary rank equals twice the algebra rank, with perfect duality.

    One entry per layer r = 1..r_max. The algebra rank is the rank of the
    ordinary cusp-form lattice, so it is recorded as the implied rank of the
    weight-2 ordinary cusp-form space at that layer.
    """
    n, p, r_max = instance
    entries = []
    for r in range(1, r_max + 1):
        started = time.monotonic()
        pipe = session.pipeline(n, p, r)
        qe = qexp_basis(pipe.dec, pipe.algebra, session.config.n_max)
        ord_rank = pipe.dec.rank
        alg_rank = pipe.algebra.rank
        ok = ord_rank == 2 * alg_rank and qe.duality_valuation == 0
        data = {
            "level": pipe.space.level,
            "r": r,
            "ordinary_rank": ord_rank,
            "algebra_rank": alg_rank,
            "duality_valuation": qe.duality_valuation,
            "duality_n_max": qe.n_max,
            "cusp_form_rank": alg_rank,
        }
        if not ok:
            data["witness"] = {
                "expected": "ordinary_rank == 2 * algebra_rank and valuation 0",
                "got": [ord_rank, alg_rank, qe.duality_valuation],
            }
        entries.append(
            _entry(instance, "rank_duality", ok, session.config.precision, data, time.monotonic() - started)
        )
    return entries


def _standard_lattice(n: int) -> Lattice:
    return Lattice(n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def _ordinary_module(session: VerificationSession, pipe: Pipeline):
    """The ordinary summand as a module over its layer ring.

    The summand is only an e-image mod p^k, so the module lives in summand
    coordinates: gamma and T(2) are projected there first.
    """
    p = pipe.params.p
    r = pipe.params.r
    k = session.config.internal_precision
    ring = make_lambda_ring(p, r, k)
    gamma_lat = restrict_operator(diamond(pipe.space, 1 + p), pipe.dec.lattice)
    gamma = summand_operator(pipe.dec, gamma_lat)
    t2 = summand_operator(pipe.dec, lattice_operator(pipe.dec, 2))
    return module_from_action(_standard_lattice(pipe.dec.rank), gamma, ring, hecke_ops=(t2,))


def check_control(session: VerificationSession, instance, r: int | None = None, s: int | None = None) -> list[dict]:
    """Layer module is free; trace induces the base-change isomorphism.

    Defaults compare r = r_max against s = r_max - 1; when r_max = 1 the
    comparison degenerates to the identity map at the same layer, which is
    the trivially true instance of the statement.
    """
    n, p, r_max = instance
    if r is None:
        r = r_max
    if s is None:
        s = max(1, r - 1)
    if not 1 <= s <= r:
        raise HarnessError("control layers need 1 <= s <= r")
    started = time.monotonic()
    k = session.config.internal_precision
    q = p**k

    fine = session.pipeline(n, p, r)
    fine_mod = _ordinary_module(session, fine)
    fine_free = freeness_rank(fine_mod)

    data: dict = {
        "fine_level": fine.space.level,
        "r": r,
        "s": s,
        "fine_free": fine_free.free,
        "fine_rank": fine_free.rank,
        "fine_zp_rank": fine_mod.dim,
    }
    if not fine_free.free:
        data["witness"] = {
            "residue_rank": fine_free.residue_rank,
            "kernel_witness": None
            if fine_free.kernel_witness is None
            else fine_free.kernel_witness.to_json_dict(),
        }

    if s == r:
        # base change along the same layer is the identity functor; only
        # freeness carries content here
        ok = fine_free.free
        data.update(
            {
                "coarse_level": fine.space.level,
                "coarse_rank": fine_free.rank,
                "control_ok": True,
                "trivial_layer": True,
            }
        )
        entry = _entry(instance, "control", ok, session.config.precision, data, time.monotonic() - started)
        return [entry]

    coarse = session.pipeline(n, p, s)
    coarse_mod = _ordinary_module(session, coarse)
    coarse_free = freeness_rank(coarse_mod)
    data.update(
        {
            "coarse_level": coarse.space.level,
            "coarse_free": coarse_free.free,
            "coarse_rank": coarse_free.rank,
            "coarse_zp_rank": coarse_mod.dim,
        }
    )

    # trace on cuspidal coordinates, then on ordinary summand coordinates
    b_fine = fine.dec.lattice.basis_matrix()
    b_coarse = coarse.dec.lattice.basis_matrix()
    traced = trace_map(fine.space, coarse.space).mul_mod(b_fine, q)
    t_cusp = solve_mod(b_coarse, traced, p, k)
    if t_cusp is None:
        raise HarnessError("trace does not preserve cuspidal lattices")
    e_compat = coarse.dec.e.mul_mod(t_cusp, q) == t_cusp.mul_mod(fine.dec.e, q)
    data["trace_commutes_with_projector"] = e_compat

    t_ord = solve_mod(
        coarse.dec.summand.basis_matrix(),
        t_cusp.mul_mod(fine.dec.summand.basis_matrix(), q),
        p,
        k,
    )
    if t_ord is None:
        raise HarnessError("trace does not preserve ordinary summands")
    rep = control_check(fine_mod, coarse_mod, t_ord)
    data.update(
        {
            "control_ok": rep.ok,
            "surjective": rep.surjective,
            "kernel_is_augmentation_image": rep.kernel_in_ideal_image and rep.ideal_image_in_kernel,
        }
    )
    ok = (
        fine_free.free
        and coarse_free.free
        and fine_free.rank == coarse_free.rank
        and e_compat
        and rep.ok
    )
    return [_entry(instance, "control", ok, session.config.precision, data, time.monotonic() - started)]


def check_stabilization(session: VerificationSession, instance) -> list[dict]:
    """T(p) on each packet's ordinary old part is the Frobenius unit root.

    Runs over every ordinary eigen packet of the tame level (r = 0); a tame
    level without cusp forms yields the vacuously true entry.
    """
    n, p, _ = instance
    started = time.monotonic()
    stab_pipe = session.pipeline(n, p, 1)

    packets = []
    if n > 4 and genus(n) > 0:
        base_pipe = session.pipeline(n, p, 0)
        packets = eigen_packets(base_pipe.dec, base_pipe.algebra, session.config.n_max)

    results = []
    all_ok = True
    if not packets:
        rep = stabilization_check(None, stab_pipe.dec, stab_pipe.space)
        all_ok = rep.ok
        results.append(
            {
                "packet": None,
                "ok": rep.ok,
                "vacuous": rep.vacuous,
                "note": rep.note,
            }
        )
    for packet in packets:
        rep = stabilization_check(packet, stab_pipe.dec, stab_pipe.space)
        all_ok = all_ok and rep.ok
        kp = min(session.config.precision, packet.k)
        results.append(
            {
                "packet": {"level": packet.level, "a_p": packet.a_n(p).residue % p**kp},
                "ok": rep.ok,
                "vacuous": rep.vacuous,
                "old_rank": rep.old_rank,
                "ordinary_old_rank": rep.ordinary_old_rank,
                "eigenvalue": None if rep.eigenvalue is None else rep.eigenvalue.residue % p**kp,
                "unit_root": None if rep.alpha is None else rep.alpha.residue % p**kp,
                "precision": kp,
                "note": rep.note,
            }
        )
    data = {"base_level": n, "stabilized_level": stab_pipe.space.level, "packets": results}
    return [
        _entry(instance, "stabilization", all_ok, session.config.precision, data, time.monotonic() - started)
    ]


def _oracle_entries(session: VerificationSession, path: str) -> list[dict]:
    """Compare CSV eigenvalue rows against packets at matching built levels.

    A row passes when some packet at its level matches mod p^k; mismatches
    become failure entries carrying both values. Levels never built in this
    run are reported as skipped rather than silently dropped.
    """
    started = time.monotonic()
    rows = []
    try:
        with open(path, newline="") as handle:
            for row in csv.DictReader(handle):
                rows.append((int(row["level"]), int(row["n"]), int(row["a_n"])))
    except (OSError, ValueError, KeyError) as exc:
        return [
            _entry(
                ("oracle",),
                "oracle",
                False,
                session.config.precision,
                {"path": path, "error": f"unreadable oracle: {exc}"},
                time.monotonic() - started,
            )
        ]

    by_level: dict[int, list] = {}
    for pipe in session._pipelines.values():
        by_level.setdefault(pipe.space.level, []).append(pipe)

    checked = 0
    skipped = 0
    failures = []
    for level, n, a_n in rows:
        pipes = by_level.get(level)
        if not pipes or n > session.config.n_max:
            skipped += 1
            continue
        pipe = pipes[0]
        packets = eigen_packets(pipe.dec, pipe.algebra, session.config.n_max)
        if not packets:
            skipped += 1
            continue
        checked += 1
        matched = False
        candidates = []
        for packet in packets:
            kp = min(session.config.precision, packet.k)
            q = packet.p**kp
            candidates.append(packet.a_n(n).residue % q)
            if (packet.a_n(n).residue - a_n) % q == 0:
                matched = True
                break
        if not matched:
            failures.append({"level": level, "n": n, "expected": a_n, "packets": candidates})

    ok = not failures
    data = {"path": path, "rows": len(rows), "checked": checked, "skipped": skipped}
    if failures:
        data["witness"] = failures
    return [_entry(("oracle",), "oracle", ok, session.config.precision, data, time.monotonic() - started)]


def run(config: VerificationConfig) -> dict:
    """Execute the configured checks and return the versioned report."""
    session = VerificationSession(config)
    entries: list[dict] = []
    for instance in config.instances:
        if "rank_duality" in config.checks:
            entries.extend(check_rank_duality(session, instance))
        if "control" in config.checks:
            entries.extend(check_control(session, instance))
        if "stabilization" in config.checks:
            entries.extend(check_stabilization(session, instance))
    if config.oracle:
        entries.extend(_oracle_entries(session, config.oracle))
    session.flush_cache()
    report = {
        "schema": REPORT_SCHEMA,
        "code": CODE_TAG,
        "config": config.to_json_dict(),
        "entries": entries,
        "ok": all(entry["ok"] for entry in entries),
    }
    if config.cache_dir:
        _atomic_write_json(os.path.join(config.cache_dir, "report.json"), report)
    return report


def render_report(report: dict) -> str:
    """Human-readable one-line-per-entry rendering of a report."""
    lines = [f"{report['schema']} ({report['code']})"]
    for entry in report["entries"]:
        status = "PASS" if entry["ok"] else "FAIL"
        inst = ",".join(str(x) for x in entry["instance"])
        data = entry["data"]
        detail = ""
        if entry["check"] == "rank_duality":
            detail = (
                f"level {data['level']}: rank {data['ordinary_rank']} = 2*{data['algebra_rank']}, "
                f"duality valuation {data['duality_valuation']}"
            )
        elif entry["check"] == "control":
            detail = (
                f"levels {data['fine_level']}->{data.get('coarse_level')}: "
                f"free rank {data['fine_rank']} (Zp-rank {data['fine_zp_rank']}), "
                f"control {'ok' if data.get('control_ok') else 'failed'}"
            )
        elif entry["check"] == "stabilization":
            n_packets = len(data["packets"])
            detail = f"base {data['base_level']} -> {data['stabilized_level']}: {n_packets} packet(s)"
        elif entry["check"] == "oracle":
            detail = f"{data.get('checked', 0)} rows checked, {data.get('skipped', 0)} skipped"
        lines.append(f"  [{status}] {entry['check']} ({inst}) {detail}  [{entry['seconds']}s]")
    lines.append("overall: " + ("PASS" if report["ok"] else "FAIL"))
    return "\n".join(lines)
