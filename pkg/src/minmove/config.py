"""INI run configuration: parsing, validation, problem construction and echo.

Example::

    [problem]
    isotherm = freundlich-transport
    p = 1/3
    m_components = 2
    a = -2
    b = 2
    T = 0.5
    dx = 0.01
    dt = 0.01

    [initial]
    kind = bump
    bumps_1 = -0.65:0.4:1.0, 0.65:0.4:0.5
    bumps_2 = -0.65:0.4:0.5, 0.65:0.4:1.0

    [output]
    snapshot_stride = 5

``[initial] kind`` is one of ``zero``, ``bump`` (``center:half_width:height``
parabolic bumps per component), ``zkb`` (``C``, ``t0``, ``x0``; scalar PME
isotherm only) or ``file`` (CSV with one row per node, columns
``u_1..u_m`` optionally preceded by ``x``).  ``[source] kind`` is ``zero`` or
``constant`` with ``values``.  A ``[converge]`` section (``dx_sweep``,
``pme_exponents``, ``dt_over_dx``) turns the file into a convergence study.
"""

import configparser
import csv
import io
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from minmove.analytic import ZKBProfile
from minmove.errors import ConfigurationError
from minmove.isotherm import PMEIsotherm, make_isotherm
from minmove.mesh import TimePartition, build_grid, grid_from_spacing
from minmove.minimizer import SolverConfig
from minmove.stepper import ProblemSpec

INITIAL_KINDS = ("zero", "bump", "zkb", "file")
SOURCE_KINDS = ("zero", "constant")


def _num(text, what):
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise ConfigurationError(f"{what}: cannot parse number {text!r}") from None


def _int(text, what):
    v = _num(text, what)
    if v != int(v):
        raise ConfigurationError(f"{what}: expected an integer, got {text!r}")
    return int(v)


def _list(text, what):
    return tuple(_num(t, what) for t in text.split(",") if t.strip())


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def parabolic_bump(x, center, half_width, height):
    return height * np.maximum(0.0, 1.0 - ((x - center) / half_width) ** 2)


@dataclass(frozen=True)
class ConvergeConfig:
    dx_sweep: tuple
    pme_exponents: tuple
    dt_over_dx: float = 2.0

    def __post_init__(self):
        if len(self.dx_sweep) < 2:
            raise ConfigurationError("a convergence study needs at least two dx values")
        if any(h <= 0 for h in self.dx_sweep):
            raise ConfigurationError("dx values must be positive")
        if not self.pme_exponents or any(m <= 1 for m in self.pme_exponents):
            raise ConfigurationError("PME exponents must exceed 1")
        if self.dt_over_dx <= 0:
            raise ConfigurationError("dt_over_dx must be positive")


@dataclass(frozen=True)
class RunConfig:
    isotherm: str = "freundlich-transport"
    p: float = 1.0 / 3.0
    m_components: int = 1
    a: float = -2.0
    b: float = 2.0
    T: float = 0.5
    I: int | None = None
    N: int | None = None
    initial: dict = field(default_factory=lambda: {"kind": "zero"})
    source: dict = field(default_factory=lambda: {"kind": "zero"})
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_dir: str = "out"
    snapshot_stride: int | None = None
    support_eps: float = 1e-10
    converge: ConvergeConfig | None = None
    base_dir: str = "."

    # construction ---------------------------------------------------------

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_parser(cp, base_dir=str(path.parent))

    @classmethod
    def from_string(cls, text, base_dir="."):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config: {exc}") from None
        return cls.from_parser(cp, base_dir=base_dir)

    @classmethod
    def from_parser(cls, cp, base_dir="."):
        known = {"problem", "initial", "source", "solver", "output", "converge"}
        unknown = set(cp.sections()) - known
        if unknown:
            raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
        pr = cp["problem"] if cp.has_section("problem") else {}
        kw = {"base_dir": base_dir}
        for key, conv in (("isotherm", str), ("p", _num), ("m_components", _int),
                          ("a", _num), ("b", _num), ("T", _num)):
            if key in pr:
                kw[key] = pr[key].strip() if conv is str else conv(pr[key], f"problem.{key}")
        a, b = kw.get("a", cls.a), kw.get("b", cls.b)
        T = kw.get("T", cls.T)
        kw["I"] = _resolve_count(pr, "I", "dx", b - a, offset=1)
        kw["N"] = _resolve_count(pr, "N", "dt", T, offset=0)

        if cp.has_section("initial"):
            kw["initial"] = {k: v.strip() for k, v in cp["initial"].items()}
        if cp.has_section("source"):
            kw["source"] = {k: v.strip() for k, v in cp["source"].items()}
        if cp.has_section("solver"):
            s = cp["solver"]
            skw = {}
            for f in fields(SolverConfig):
                if f.name in s:
                    if f.name == "method":
                        skw[f.name] = s[f.name].strip()
                    elif f.name == "max_iters":
                        skw[f.name] = _int(s[f.name], f"solver.{f.name}")
                    else:
                        skw[f.name] = _num(s[f.name], f"solver.{f.name}")
            extra = set(s) - {f.name for f in fields(SolverConfig)}
            if extra:
                raise ConfigurationError(f"unknown solver keys: {sorted(extra)}")
            kw["solver"] = SolverConfig(**skw)
        if cp.has_section("output"):
            o = cp["output"]
            if "dir" in o:
                kw["output_dir"] = o["dir"].strip()
            if "snapshot_stride" in o:
                kw["snapshot_stride"] = _int(o["snapshot_stride"], "output.snapshot_stride")
            if "support_eps" in o:
                kw["support_eps"] = _num(o["support_eps"], "output.support_eps")
        if cp.has_section("converge"):
            c = cp["converge"]
            if "dx_sweep" not in c or "pme_exponents" not in c:
                raise ConfigurationError("[converge] needs dx_sweep and pme_exponents")
            kw["converge"] = ConvergeConfig(
                dx_sweep=_list(c["dx_sweep"], "converge.dx_sweep"),
                pme_exponents=_list(c["pme_exponents"], "converge.pme_exponents"),
                dt_over_dx=_num(c.get("dt_over_dx", "2"), "converge.dt_over_dx"),
            )
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    # validation -----------------------------------------------------------

    def validate(self):
        make_isotherm(self.isotherm, self.p, self.m_components)
        if self.converge is None:
            if self.I is None or self.N is None:
                raise ConfigurationError("[problem] needs dx or I, and dt or N")
            build_grid(self.a, self.b, self.I)
            TimePartition(self.T, self.N)
        kind = self.initial.get("kind", "zero")
        if kind not in INITIAL_KINDS:
            raise ConfigurationError(f"initial.kind must be one of {INITIAL_KINDS}, got {kind!r}")
        if self.source.get("kind", "zero") not in SOURCE_KINDS:
            raise ConfigurationError(f"source.kind must be one of {SOURCE_KINDS}")
        if self.support_eps <= 0:
            raise ConfigurationError("support_eps must be positive")
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be positive")
        if kind == "zkb" or self.converge is not None:
            if self.converge is None and self.isotherm != PMEIsotherm.kind:
                raise ConfigurationError("zkb initial data requires isotherm = pme-scalar")
            if self.m_components != 1:
                raise ConfigurationError("zkb initial data is scalar (m_components = 1)")
            exponents = (self.converge.pme_exponents if self.converge is not None
                         else (1.0 / self.p,))
            for m in exponents:
                self.zkb_profile(m).check_inside(self.a, self.b, self.T)
        if self.converge is not None and kind != "zkb":
            raise ConfigurationError("a convergence study needs [initial] kind = zkb")
        if self.converge is None:
            # materialize once so bad bump/file specs fail before any solve
            self.build_problem()

    # problem construction -------------------------------------------------

    @property
    def stride(self):
        if self.snapshot_stride is not None:
            return self.snapshot_stride
        return 1 if self.converge is not None else 10

    def zkb_profile(self, m_exponent):
        ini = self.initial
        try:
            return ZKBProfile(
                C=_num(ini["C"], "initial.C"),
                t0=_num(ini["t0"], "initial.t0"),
                x0=_num(ini.get("x0", "0"), "initial.x0"),
                m_exponent=m_exponent,
            )
        except KeyError as exc:
            raise ConfigurationError(f"zkb initial data needs {exc.args[0]}") from None

    def _initial_condition(self, grid):
        ini = self.initial
        kind = ini.get("kind", "zero")
        m = self.m_components
        if kind == "zero":
            return np.zeros((grid.n_nodes, m))
        if kind == "zkb":
            return self.zkb_profile(1.0 / self.p).initial_condition()
        if kind == "bump":
            U = np.zeros((grid.n_nodes, m))
            for k in range(m):
                spec = ini.get(f"bumps_{k + 1}", "")
                for item in spec.split(","):
                    if not item.strip():
                        continue
                    parts = item.split(":")
                    if len(parts) != 3:
                        raise ConfigurationError(
                            f"bump {item!r} must be center:half_width:height"
                        )
                    c, w, h = (_num(v, f"initial.bumps_{k + 1}") for v in parts)
                    if w <= 0:
                        raise ConfigurationError("bump half width must be positive")
                    U[:, k] += parabolic_bump(grid.nodes, c, w, h)
            return U
        path = Path(ini.get("path", ""))
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        return read_nodal_csv(path, grid.n_nodes, m)

    def _source(self):
        src = self.source
        if src.get("kind", "zero") == "zero":
            return None
        vals = np.array(_list(src.get("values", ""), "source.values"))
        if vals.size not in (1, self.m_components):
            raise ConfigurationError("source.values needs 1 or m_components entries")
        vals = np.broadcast_to(vals, (self.m_components,)).copy()
        return lambda t, x: np.broadcast_to(vals, (len(x), vals.size))

    def build_problem(self):
        grid = build_grid(self.a, self.b, self.I)
        iso = make_isotherm(self.isotherm, self.p, self.m_components)
        spec = ProblemSpec(iso, grid, TimePartition(self.T, self.N),
                           self._initial_condition(grid), self._source())
        spec.initial_values()
        return spec

    def sweep_problems(self):
        """``(m, dx, ProblemSpec, ZKBProfile)`` for every member of the convergence study."""
        cc = self.converge
        out = []
        for m in cc.pme_exponents:
            prof = self.zkb_profile(m)
            for dx in cc.dx_sweep:
                grid = grid_from_spacing(self.a, self.b, dx)
                # uniform partition: dt is the closest T/N to dt_over_dx * dx
                N = max(1, int(round(self.T / (cc.dt_over_dx * dx))))
                spec = ProblemSpec(PMEIsotherm.from_pme_exponent(m), grid,
                                   TimePartition(self.T, N), prof.initial_condition())
                out.append((m, dx, spec, prof))
        return out

    # echo -----------------------------------------------------------------

    def to_ini(self):
        """Effective configuration with every default resolved."""
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["problem"] = {
            "isotherm": self.isotherm,
            "p": _fmt(self.p),
            "m_components": str(self.m_components),
            "a": _fmt(self.a),
            "b": _fmt(self.b),
            "T": _fmt(self.T),
        }
        if self.I is not None:
            cp["problem"]["I"] = str(self.I)
        if self.N is not None:
            cp["problem"]["N"] = str(self.N)
        initial = dict(self.initial)
        if initial.get("kind") == "file":
            path = Path(initial.get("path", ""))
            if not path.is_absolute():
                initial["path"] = str((Path(self.base_dir) / path).resolve())
        cp["initial"] = initial
        cp["source"] = dict(self.source)
        cp["solver"] = {k: _fmt(v) for k, v in asdict(self.solver).items()}
        cp["output"] = {
            "dir": self.output_dir,
            "snapshot_stride": str(self.stride),
            "support_eps": _fmt(self.support_eps),
        }
        if self.converge is not None:
            cp["converge"] = {
                "dx_sweep": ", ".join(_fmt(v) for v in self.converge.dx_sweep),
                "pme_exponents": ", ".join(_fmt(v) for v in self.converge.pme_exponents),
                "dt_over_dx": _fmt(self.converge.dt_over_dx),
            }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _resolve_count(section, count_key, step_key, length, offset):
    """Resolve ``I``/``dx`` (or ``N``/``dt``); both may be given if they agree."""
    count = _int(section[count_key], f"problem.{count_key}") if count_key in section else None
    if step_key in section:
        step = _num(section[step_key], f"problem.{step_key}")
        if step <= 0:
            raise ConfigurationError(f"problem.{step_key} must be positive")
        cells = length / step
        n = int(round(cells))
        if n < 1 or abs(cells - n) > 1e-9 * max(cells, 1.0):
            raise ConfigurationError(
                f"problem.{step_key}={step} does not divide the interval into equal parts"
            )
        derived = n - offset
        if count is not None and count != derived:
            raise ConfigurationError(
                f"problem.{count_key}={count} is inconsistent with {step_key}={step}"
            )
        count = derived
    return count


def read_nodal_csv(path, n_nodes, m):
    """Nodal initial data: one row per node, columns ``u_1..u_m`` (optionally ``x`` first)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigurationError(f"cannot read initial data {path}: {exc}") from None
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        raise ConfigurationError(f"non-numeric entry in {path}") from None
    if data.ndim != 2 or data.shape[0] != n_nodes or data.shape[1] not in (m, m + 1):
        raise ConfigurationError(
            f"{path}: expected {n_nodes} rows of {m} (or {m + 1}) columns, got {data.shape}"
        )
    return data[:, -m:]


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
