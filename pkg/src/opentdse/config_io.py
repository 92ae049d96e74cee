"""
INI configuration files.

Keys carry their unit in the name (``dx_nm``, ``dt_fs``, ``energy_ev``).
Missing keys fall back to the SimulationConfig defaults.  Example::

    [grid]
    x_min_nm = -800
    x_max_nm = 800
    dx_nm = 0.2
    a_nm = 0
    b_nm = 50

    [time]
    dt_fs = 0.01
    stop_rule = norm

    [packet]
    sigma0_nm = 17.677669529663689
    x0_nm = -90
    energy_ev = 1.0

    [potential]
    kind = rectangular_barrier
    barrier_center_nm = 27.5
    barrier_width_nm = 5
    barrier_height_ev = 0.93

    [boundary]            ; applies to both sides unless overridden
    La_nm = 20
    m_exp = 5
"""

from __future__ import annotations

import configparser
import os
from dataclasses import fields, replace

import numpy as np

from .core import BoundarySpec, GaussianParams, OutputSpec, PotentialSpec, SimulationConfig
from .exceptions import ConfigError, DomainError
from .hamiltonians import wavevector_from_energy

__all__ = ["load_config", "parse_config", "dump_config", "with_energy"]

_NONE = ("none", "null", "")


def _float(sec, key, default=None):
    raw = sec.get(key)
    if raw is None:
        return default
    if raw.strip().lower() in _NONE:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError([f"{sec.name}.{key}: not a number: {raw!r}"]) from None


def _int(sec, key, default=None):
    value = _float(sec, key, default)
    if value is None:
        return None
    if value != int(value):
        raise ConfigError([f"{sec.name}.{key}: not an integer: {sec.get(key)!r}"])
    return int(value)


def _bool(sec, key, default):
    if key not in sec:
        return default
    try:
        return sec.getboolean(key)
    except ValueError:
        raise ConfigError([f"{sec.name}.{key}: not a boolean: {sec.get(key)!r}"]) from None


_KNOWN = {
    "grid": {"x_min_nm", "x_max_nm", "dx_nm", "a_nm", "b_nm"},
    "time": {"dt_fs", "n_steps", "max_steps", "stop_rule", "stop_threshold"},
    "model": {"model", "m_star_m0", "tb_rho_ev", "tb_u_ev"},
    "packet": {"sigma0_nm", "x0_nm", "kx_per_nm", "energy_ev", "injection_side", "amplitude", "injection"},
    "potential": {"kind", "barrier_center_nm", "barrier_width_nm", "barrier_height_ev", "table_file", "table_times_fs"},
    "boundary": {"absorb", "L_nm", "m_exp", "La_nm", "width_nm", "k_local_per_nm", "absorber"},
    "output": {"cadence", "formats", "out_dir"},
    "run": {"left_mask_during_injection", "contamination_tol"},
}


def _check_keys(cp):
    problems = []
    for name in cp.sections():
        base = "boundary" if name.startswith("boundary") else name
        if base not in _KNOWN:
            problems.append(f"unknown section [{name}]")
            continue
        if name not in ("boundary", "boundary.left", "boundary.right") and base == "boundary":
            problems.append(f"unknown section [{name}]")
        known_lower = {k.lower() for k in _KNOWN[base]}
        for key in cp[name]:
            if key.lower() not in known_lower:
                problems.append(f"[{name}] unknown key {key!r}")
    if problems:
        raise ConfigError(problems)


def _boundary(cp, side, default: BoundarySpec) -> BoundarySpec:
    spec = default
    for name in ("boundary", f"boundary.{side}"):
        if name not in cp:
            continue
        sec = cp[name]
        spec = BoundarySpec(
            absorb=_bool(sec, "absorb", spec.absorb),
            L=_float(sec, "L_nm", spec.L) if "l_nm" in sec else spec.L,
            m_exp=_int(sec, "m_exp", spec.m_exp),
            La=_float(sec, "La_nm", spec.La) if "la_nm" in sec else spec.La,
            width=_float(sec, "width_nm", spec.width) if "width_nm" in sec else spec.width,
            k_local=_float(sec, "k_local_per_nm", spec.k_local) if "k_local_per_nm" in sec else spec.k_local,
            absorber=sec.get("absorber", spec.absorber),
        )
    return spec


def parse_config(text: str, base_dir: str = ".") -> SimulationConfig:
    """Build a SimulationConfig from INI text; raises ConfigError on malformed input."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError([f"cannot parse config: {err}"]) from None
    _check_keys(cp)
    d = SimulationConfig.__dataclass_fields__
    empty = configparser.SectionProxy(cp, "DEFAULT")

    def sec(name):
        return cp[name] if name in cp else empty

    g, tm, mo, pk, po, out, rn = (sec(n) for n in ("grid", "time", "model", "packet", "potential", "output", "run"))
    model = mo.get("model", "effective_mass")
    m_star = _float(mo, "m_star_m0", 0.2)
    dx = _float(g, "dx_nm", d["dx"].default)
    tb_rho = _float(mo, "tb_rho_ev")
    tb_u = _float(mo, "tb_u_ev")

    if "sigma0_nm" not in pk or "x0_nm" not in pk:
        raise ConfigError(["[packet] needs sigma0_nm and x0_nm"])
    side = pk.get("injection_side", "left")
    if "kx_per_nm" in pk:
        kx = _float(pk, "kx_per_nm")
    elif "energy_ev" in pk:
        kx = _kx_from_energy(model, _float(pk, "energy_ev"), m_star, tb_rho, tb_u, dx)
        if side == "right":
            kx = -kx
    else:
        raise ConfigError(["[packet] needs kx_per_nm or energy_ev"])
    amp = complex(pk.get("amplitude", "1").replace(" ", ""))
    packet = GaussianParams(_float(pk, "sigma0_nm"), _float(pk, "x0_nm"), kx, m_star, side, amp)

    kind = po.get("kind", "flat")
    table = times = None
    if "table_file" in po:
        path = os.path.join(base_dir, po.get("table_file"))
        try:
            table = np.loadtxt(path, ndmin=1 if kind == "tabulated" else 2)
        except OSError as err:
            raise ConfigError([f"cannot read potential table: {err}"]) from None
    if "table_times_fs" in po:
        times = np.array([float(v) for v in po.get("table_times_fs").replace(",", " ").split()])
    potential = PotentialSpec(
        kind=kind,
        barrier_center=_float(po, "barrier_center_nm", 0.0),
        barrier_width=_float(po, "barrier_width_nm", 0.0),
        barrier_height=_float(po, "barrier_height_ev", 0.0),
        table=table,
        table_times=times,
    )

    default_b = BoundarySpec()
    formats = tuple(f.strip() for f in out.get("formats", "csv").split(",") if f.strip())
    outputs = OutputSpec(
        cadence=_int(out, "cadence", 100),
        formats=formats,
        out_dir=out.get("out_dir", os.environ.get("OPENTDSE_OUT", "out")),
    )
    cfg = SimulationConfig(
        packet=packet,
        x_min=_float(g, "x_min_nm", d["x_min"].default),
        x_max=_float(g, "x_max_nm", d["x_max"].default),
        dx=dx,
        a=_float(g, "a_nm", d["a"].default),
        b=_float(g, "b_nm", d["b"].default),
        dt=_float(tm, "dt_fs", d["dt"].default),
        model=model,
        m_star=m_star,
        tb_rho=tb_rho,
        tb_u=tb_u,
        potential=potential,
        left_boundary=_boundary(cp, "left", default_b),
        right_boundary=_boundary(cp, "right", default_b),
        outputs=outputs,
        n_steps=_int(tm, "n_steps"),
        max_steps=_int(tm, "max_steps", d["max_steps"].default),
        stop_rule=tm.get("stop_rule", "norm"),
        stop_threshold=_float(tm, "stop_threshold"),
        injection=pk.get("injection", "analytic"),
        left_mask_during_injection=_bool(rn, "left_mask_during_injection", True),
        contamination_tol=_float(rn, "contamination_tol", 1e-10) if "contamination_tol" in rn else 1e-10,
    )
    return cfg


def _kx_from_energy(model, E, m_star, rho, u, dx):
    from .core import TightBindingParams

    try:
        if model == "tight_binding":
            if rho is None or u is None:
                raise ConfigError(["tight_binding model needs tb_rho_ev and tb_u_ev"])
            return wavevector_from_energy(model, E, TightBindingParams(rho, u, dx))
        return wavevector_from_energy("effective_mass", E, m_star)
    except DomainError as err:
        raise ConfigError([f"[packet] energy_ev: {err}"]) from None


def load_config(path: str) -> SimulationConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError([f"cannot read config {path!r}: {err.strerror}"]) from None
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


def with_energy(config: SimulationConfig, energy: float) -> SimulationConfig:
    """Copy of ``config`` whose packet carries the wavevector of ``energy`` (eV)."""
    kx = _kx_from_energy(config.model, energy, config.m_star, config.tb_rho, config.tb_u, config.dx)
    if config.packet.injection_side == "right":
        kx = -kx
    return replace(config, packet=replace(config.packet, kx=kx))


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def dump_config(config: SimulationConfig) -> str:
    """INI text that parses back to ``config`` (tabulated potentials excluded)."""
    p = config.packet
    lines = [
        "[grid]",
        f"x_min_nm = {_fmt(config.x_min)}",
        f"x_max_nm = {_fmt(config.x_max)}",
        f"dx_nm = {_fmt(config.dx)}",
        f"a_nm = {_fmt(config.a)}",
        f"b_nm = {_fmt(config.b)}",
        "",
        "[time]",
        f"dt_fs = {_fmt(config.dt)}",
        f"n_steps = {_fmt(config.n_steps)}",
        f"max_steps = {config.max_steps}",
        f"stop_rule = {config.stop_rule}",
        f"stop_threshold = {_fmt(config.stop_threshold)}",
        "",
        "[model]",
        f"model = {config.model}",
        f"m_star_m0 = {_fmt(config.m_star)}",
        f"tb_rho_ev = {_fmt(config.tb_rho)}",
        f"tb_u_ev = {_fmt(config.tb_u)}",
        "",
        "[packet]",
        f"sigma0_nm = {_fmt(p.sigma0)}",
        f"x0_nm = {_fmt(p.x0)}",
        f"kx_per_nm = {_fmt(p.kx)}",
        f"injection_side = {p.injection_side}",
        f"amplitude = {complex(p.amplitude)!r}".replace("(", "").replace(")", ""),
        f"injection = {config.injection}",
        "",
        "[potential]",
        f"kind = {config.potential.kind}",
        f"barrier_center_nm = {_fmt(config.potential.barrier_center)}",
        f"barrier_width_nm = {_fmt(config.potential.barrier_width)}",
        f"barrier_height_ev = {_fmt(config.potential.barrier_height)}",
    ]
    for side, b in (("left", config.left_boundary), ("right", config.right_boundary)):
        lines += ["", f"[boundary.{side}]"]
        for f in fields(BoundarySpec):
            key = {"L": "L_nm", "La": "La_nm", "width": "width_nm", "k_local": "k_local_per_nm"}.get(f.name, f.name)
            lines.append(f"{key} = {_fmt(getattr(b, f.name))}")
    lines += [
        "",
        "[output]",
        f"cadence = {config.outputs.cadence}",
        f"formats = {','.join(config.outputs.formats)}",
        f"out_dir = {config.outputs.out_dir}",
        "",
        "[run]",
        f"left_mask_during_injection = {_fmt(config.left_mask_during_injection)}",
        f"contamination_tol = {_fmt(config.contamination_tol)}",
        "",
    ]
    return "\n".join(lines)
