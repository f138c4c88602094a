"""Command orchestration: resolve a scenario, run it, emit tables, figures
and a manifest.

Every command writes ``manifest.json`` (resolved config, derived parameters,
regime, warnings, wall-clock duration, output list) into its output
directory.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure; the CLI maps exceptions accordingly.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import outputs as out
from .config import (
    ScenarioConfig,
    apply_overrides,
    build_manifest,
    parse_config,
    write_manifest,
)
from .effective import detect_braided_geometry, dfi_report
from .errors import ConfigError, SkinbathError
from .evolve import evolve, extract_observables, initial_state
from .hyperbolic import curvature, pseudosphere_sample, site_coordinates
from .model import assemble_hamiltonian
from .presets import get_preset
from .selfenergy import SelfEnergyQuery, sigma_giant, sigma_pair_braided_arbitrary
from .spectra import hidden_bound_state, pbc_spectrum


class _Timer:
    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.duration = time.perf_counter() - self._t0
        return False


def _simulate_once(cfg: ScenarioConfig):
    spec = cfg.spec
    if spec.n_emitters == 0:
        raise ConfigError("simulation needs at least one emitter", path="emitters")
    h = assemble_hamiltonian(spec)
    excite = cfg.simulation.excite or spec.labels[0]
    traj = evolve(
        h,
        initial_state(spec, excite),
        cfg.simulation.integrator_config(),
        record_fields=cfg.simulation.record_fields,
    )
    return traj


def run_simulate(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    with _Timer() as timer:
        traj = _simulate_once(cfg)
        files = []
        header, rows = out.trajectory_rows(traj)
        files += out.write_table(out_dir, "trajectory", header, rows, formats)
        if cfg.simulation.record_fields:
            header, rows = out.fields_rows(traj)
            files += out.write_table(out_dir, "fields", header, rows, formats)
        if plots:
            files += _trajectory_figure(out_dir, [("", cfg, traj)], log_y=not _is_bounded(traj))
            if cfg.simulation.record_fields:
                from . import plotting

                obs = extract_observables(traj, "intensity")
                files.append(
                    plotting.save_fields(out_dir / "fields.png", traj.times, obs.log10)
                )
    manifest = build_manifest("simulate", cfg, traj.warnings, timer.duration, files)
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def _is_bounded(traj) -> bool:
    obs = extract_observables(traj, "population")
    return bool(obs.linear_ok and np.nanmax(obs.log10) < 1.0)


def _trajectory_figure(out_dir, named_runs, log_y, stem="figure"):
    from . import plotting

    curves = []
    for name, cfg, traj in named_runs:
        obs = extract_observables(traj, "population")
        for j, label in enumerate(traj.labels):
            curve_label = f"P_{label}" + (f" [{name}]" if name else "")
            curves.append((curve_label, traj.times, obs.linear[:, j], obs.log10[:, j]))
    return [plotting.save_trajectories(out_dir / f"{stem}.png", curves, log_y=log_y)]


def run_spectrum(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    with _Timer() as timer:
        spectrum = pbc_spectrum(cfg.spec.lattice, cfg.spectrum_k_count)
        header, rows = out.spectrum_rows(spectrum.k, spectrum.energies)
        files = out.write_table(out_dir, "spectrum", header, rows, formats)
        if plots:
            from . import plotting

            files.append(
                plotting.save_spectrum(
                    out_dir / "figure.png", [("lattice", spectrum.energies)]
                )
            )
    manifest = build_manifest(
        "spectrum",
        cfg,
        [],
        timer.duration,
        files,
        extra={"max_imag": spectrum.max_imag},
    )
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def run_selfenergy(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    spec = cfg.spec
    lat = spec.lattice
    if lat.t_l <= 0:
        raise ConfigError(
            "analytic self-energies need t_L > 0 (convectively unstable bath)"
        )
    if spec.n_emitters == 0:
        raise ConfigError("selfenergy needs at least one emitter", path="emitters")
    with _Timer() as timer:
        j = math.sqrt(lat.t_r * lat.t_l)
        span = cfg.selfenergy_span
        deltas = np.linspace(-span * 2 * j, span * 2 * j, cfg.selfenergy_points)
        geo = detect_braided_geometry(spec)
        channels: dict[str, np.ndarray] = {}
        if geo is not None and geo.d_prime == 1 and geo.d_dprime == 2:
            vals = [
                sigma_pair_braided_arbitrary(d, geo.g_b, geo.g_c, lat.t_r, lat.t_l)
                for d in deltas
            ]
            channels["b"] = np.array([v.sigma_b for v in vals])
            channels["c"] = np.array([v.sigma_c for v in vals])
            channels["bc"] = np.array([v.sigma_bc for v in vals])
            channels["cb"] = np.array([v.sigma_cb for v in vals])
        else:
            emitter = spec.emitters[0]
            if len(emitter.couplings) > 2:
                raise ConfigError("selfenergy supports at most two coupling points")
            g_n = emitter.strengths[0]
            g_np = emitter.strengths[1] if len(emitter.couplings) == 2 else 0.0
            d = emitter.sites[1] - emitter.sites[0] if len(emitter.couplings) == 2 else 0
            channels[emitter.label] = np.array(
                [
                    sigma_giant(
                        SelfEnergyQuery(z=dd, g_n=g_n, g_np=g_np, d=d, t_r=lat.t_r, t_l=lat.t_l)
                    ).sigma_b
                    for dd in deltas
                ]
            )
        header, rows = out.selfenergy_rows(deltas, channels)
        files = out.write_table(out_dir, "selfenergy", header, rows, formats)
        if plots:
            import matplotlib.pyplot as plt

            fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(9.2, 3.8))
            for name, series in channels.items():
                ax_re.plot(deltas, series.real, lw=1.3, label=name)
                ax_im.plot(deltas, series.imag, lw=1.3, label=name)
            ax_re.set_xlabel("detuning")
            ax_re.set_ylabel("Re Sigma (Lamb shift)")
            ax_im.set_xlabel("detuning")
            ax_im.set_ylabel("Im Sigma (-(decay rate)/2)")
            for ax in (ax_re, ax_im):
                ax.grid(alpha=0.3)
                ax.legend(fontsize=8)
            fig.tight_layout()
            fig.savefig(out_dir / "figure.png", dpi=150)
            plt.close(fig)
            files.append("figure.png")
    manifest = build_manifest("selfenergy", cfg, [], timer.duration, files)
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def run_boundstate(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    with _Timer() as timer:
        result = hidden_bound_state(
            cfg.spec,
            e_target=cfg.boundstate_target,
            tol=cfg.boundstate_tol,
            max_iter=cfg.boundstate_max_iter,
        )
        header, rows = out.profile_rows(result.lattice_profile)
        files = out.write_table(out_dir, "profile", header, rows, formats)
        if plots:
            from . import plotting

            sites = [s for e in cfg.spec.emitters for s in e.sites]
            files.append(
                plotting.save_profiles(
                    out_dir / "figure.png",
                    [("bound state", np.abs(result.lattice_profile))],
                    coupling_sites=sites,
                )
            )
        warnings = [] if result.converged else ["inverse iteration did not converge"]
    manifest = build_manifest(
        "boundstate",
        cfg,
        warnings,
        timer.duration,
        files,
        extra={
            "boundstate": {
                "energy": result.energy,
                "residual": result.residual,
                "iterations": result.iterations,
                "converged": result.converged,
                "emitter_amplitudes": result.emitter_amplitudes,
            }
        },
    )
    write_manifest(out_dir / "manifest.json", manifest)
    if not result.converged:
        raise SkinbathError(
            f"inverse iteration did not converge (residual {result.residual:.3g})"
        )
    return manifest


def run_dfi(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    with _Timer() as timer:
        report = dfi_report(cfg.spec)
        files = []
        if report.supported:
            res = report.sigma
            channels = {
                "b": np.array([res.sigma_b]),
                "c": np.array([res.sigma_c]),
                "bc": np.array([res.sigma_bc]),
                "cb": np.array([res.sigma_cb]),
            }
            header, rows = out.selfenergy_rows(np.array([0.0]), channels)
            files += out.write_table(out_dir, "selfenergy", header, rows, formats)
        extra = {
            "dfi": {
                "supported": report.supported,
                "is_DFI": report.is_dfi,
                "nonreciprocity_ratio": report.nonreciprocity_ratio,
                "rabi_frequency": report.rabi_frequency,
                "period": report.period,
                "note": report.note,
            }
        }
    manifest = build_manifest("dfi", cfg, [], timer.duration, files, extra=extra)
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def run_hyperbolic(cfg: ScenarioConfig, out_dir: Path, formats=("csv",), plots=True):
    with _Timer() as timer:
        lat = cfg.spec.lattice
        warnings = []
        if cfg.hyperbolic_kappa is not None:
            kappa = cfg.hyperbolic_kappa
        else:
            beta = lat.beta
            if beta is None:
                raise ConfigError("hyperbolic map needs t_L > 0 (or an explicit kappa)")
            kappa = curvature(beta)
        n_max = lat.m - 1
        if kappa > 0:
            n_max = min(n_max, int(700.0 / math.sqrt(kappa)))
            if n_max < lat.m - 1:
                warnings.append(
                    f"site coordinates truncated to n <= {n_max} to stay within "
                    "floating-point range"
                )
        hmap = site_coordinates(cfg.hyperbolic_x0, range(n_max + 1), kappa)
        header, rows = out.site_rows(hmap)
        files = out.write_table(out_dir, "sites", header, rows, formats)
        if hmap.flat:
            warnings.append("kappa = 0: flat (degenerate) case, no pseudosphere emitted")
        else:
            sample = pseudosphere_sample(
                kappa, cfg.hyperbolic_r_count, cfg.hyperbolic_theta_count
            )
            header, rows = out.surface_rows(sample)
            files += out.write_table(out_dir, "surface", header, rows, formats)
            if plots:
                from . import plotting

                files.append(
                    plotting.save_surface(
                        out_dir / "figure.png", sample, title=f"kappa = {kappa:g}"
                    )
                )
    manifest = build_manifest(
        "hyperbolic", cfg, warnings, timer.duration, files, extra={"kappa": kappa}
    )
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def run_reproduce(preset_id: str, out_dir: Path, formats=("csv",), plots=True):
    try:
        preset = get_preset(preset_id)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    kind = preset["kind"]
    with _Timer() as timer:
        files: list[str] = []
        warnings: list[str] = []
        named_runs = []
        single = len(preset["runs"]) == 1
        for run in preset["runs"]:
            cfg = parse_config(run["config"])
            name = run["name"]
            suffix = "" if single else f"__{name}"
            if kind in ("trajectory", "fields"):
                traj = _simulate_once(cfg)
                warnings += [f"{name}: {w}" for w in traj.warnings]
                header, rows = out.trajectory_rows(traj)
                files += out.write_table(out_dir, f"trajectory{suffix}", header, rows, formats)
                if cfg.simulation.record_fields:
                    header, rows = out.fields_rows(traj)
                    files += out.write_table(out_dir, f"fields{suffix}", header, rows, formats)
                named_runs.append((name if not single else "", cfg, traj))
            elif kind == "spectrum":
                spectrum = pbc_spectrum(cfg.spec.lattice, cfg.spectrum_k_count)
                header, rows = out.spectrum_rows(spectrum.k, spectrum.energies)
                files += out.write_table(out_dir, f"spectrum{suffix}", header, rows, formats)
                named_runs.append((name, cfg, spectrum))
            elif kind == "boundstate":
                result = hidden_bound_state(
                    cfg.spec, e_target=cfg.boundstate_target, tol=cfg.boundstate_tol,
                    max_iter=cfg.boundstate_max_iter,
                )
                if not result.converged:
                    warnings.append(f"{name}: inverse iteration did not converge")
                header, rows = out.profile_rows(result.lattice_profile)
                files += out.write_table(out_dir, f"profile{suffix}", header, rows, formats)
                named_runs.append((name, cfg, result))
            elif kind == "surface":
                kappa = cfg.hyperbolic_kappa
                sample = pseudosphere_sample(
                    kappa, cfg.hyperbolic_r_count, cfg.hyperbolic_theta_count
                )
                header, rows = out.surface_rows(sample)
                files += out.write_table(out_dir, f"surface{suffix}", header, rows, formats)
                named_runs.append((name, cfg, sample))
            else:
                raise ConfigError(f"unknown preset kind {kind!r}")

        if plots:
            files += _preset_figures(out_dir, preset, named_runs)

    first_cfg = parse_config(preset["runs"][0]["config"])
    manifest = build_manifest(
        f"reproduce {preset_id}",
        first_cfg,
        warnings,
        timer.duration,
        files,
        extra={
            "preset": {
                "id": preset_id,
                "description": preset["description"],
                "runs": [{"name": r["name"], "config": r["config"]} for r in preset["runs"]],
            }
        },
    )
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def _preset_figures(out_dir, preset, named_runs):
    from . import plotting

    kind = preset["kind"]
    files = []
    if kind in ("trajectory", "fields"):
        files += _trajectory_figure(
            out_dir,
            named_runs,
            log_y=preset.get("log_y", False),
        )
        if kind == "fields":
            for name, cfg, traj in named_runs:
                obs = extract_observables(traj, "intensity")
                files.append(
                    plotting.save_fields(
                        out_dir / f"fields__{name}.png", traj.times, obs.log10, title=name
                    )
                )
    elif kind == "spectrum":
        files.append(
            plotting.save_spectrum(
                out_dir / "figure.png",
                [(name, spectrum.energies) for name, _, spectrum in named_runs],
            )
        )
    elif kind == "boundstate":
        for name, cfg, result in named_runs:
            sites = [s for e in cfg.spec.emitters for s in e.sites]
            files.append(
                plotting.save_profiles(
                    out_dir / f"figure__{name}.png",
                    [(name, np.abs(result.lattice_profile))],
                    coupling_sites=sites,
                    title=name,
                )
            )
    elif kind == "surface":
        for name, cfg, sample in named_runs:
            files.append(
                plotting.save_surface(
                    out_dir / f"figure__{name}.png", sample,
                    title=f"kappa = {sample.kappa:g}",
                )
            )
    return files


def _sweep_worker(args):
    run_dir, cfg_raw, formats, plots = args
    try:
        cfg = parse_config(cfg_raw)
        run_simulate(cfg, Path(run_dir), formats=tuple(formats), plots=plots)
        return "ok", None
    except Exception as exc:  # recorded per run; the sweep continues
        return "failed", f"{type(exc).__name__}: {exc}"


def run_sweep(
    base_raw: dict,
    overrides_list: list[dict],
    out_dir: Path,
    parallel: int = 1,
    formats=("csv",),
    plots=True,
):
    """Run one simulation per override set; outputs are identical whatever the
    parallelism (each run is independent and written to its own directory)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    entries = []
    with _Timer() as timer:
        for i, overrides in enumerate(overrides_list):
            run_name = f"run_{i:03d}"
            entry = {"index": i, "overrides": overrides, "directory": run_name}
            try:
                cfg_raw = apply_overrides(base_raw, overrides)
            except ConfigError as exc:
                entry.update(status="failed", error=str(exc))
                entries.append(entry)
                continue
            jobs.append((i, (str(out_dir / run_name), cfg_raw, tuple(formats), plots)))
            entries.append(entry)

        results = {}
        pending = [(i, args) for i, args in jobs]
        if parallel > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                for (i, _), outcome in zip(pending, pool.map(_sweep_worker, [a for _, a in pending])):
                    results[i] = outcome
        else:
            for i, args in pending:
                results[i] = _sweep_worker(args)
        for entry in entries:
            if "status" in entry:
                continue
            status, error = results[entry["index"]]
            entry["status"] = status
            if error:
                entry["error"] = error

    index = {
        "tool": "skinbath",
        "command": "sweep",
        "n_runs": len(entries),
        "duration_s": timer.duration,
        "runs": entries,
    }
    import json

    (out_dir / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    failed = [e for e in entries if e["status"] != "ok"]
    return index, 0 if not failed else 3
