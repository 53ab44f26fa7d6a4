import csv
import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from pulsecool.config.config_loader import load_config
from pulsecool.engine.engine import run
from pulsecool.engine.trajectory_io import write_trajectory_csv
from pulsecool.harness import csv_output
from pulsecool.harness.lineshape import fit_sech2
from pulsecool.harness.scans import lineshape_scan_async, temperature_scan_async
from pulsecool.imaging.crossection import crossection
from pulsecool.imaging.image_io import read_image, write_image, write_profile_csv
from pulsecool.imaging.synth import synthesize_image
from pulsecool.imaging.thermometry import temperature_from_image
from pulsecool.model.config_types import ConfigBundle
from pulsecool.model.constants import EV, TWO_PI
from pulsecool.model.errors import NoEquilibriumError, PulseCoolError, ValidationError, Violation
from pulsecool.model.validation import validate_bundle
from pulsecool.theory import theory

logger = logging.getLogger(__name__)

THEORY_HEADER = ["delta_rad_s", "delta_over_2pi_hz", "p_exc", "scatter_rate_hz", "force_N", "beta_kg_s",
                 "diffusion_W", "T_theory_K", "T_axis_theory_K"]
COOL_HEADER = ["axis", "T_K", "T_err_K", "T_kinetic_K", "T_potential_K", "T_axis_theory_K",
               "scatters", "pulses", "burn_in"]


def parse_grid(text: str) -> tuple:
    """'start:stop:n' in GHz of delta/2pi to detunings in rad/s."""
    try:
        start, stop, n = text.split(":")
        values = np.linspace(float(start), float(stop), int(n))
    except ValueError:
        raise ValidationError([Violation("grid", text, "expected start:stop:n")], context="--grid") from None
    return tuple(float(v) for v in TWO_PI * 1e9 * values)


class PulseCoolCommand:
    def __init__(self, bundle: ConfigBundle | None = None):
        self.bundle = bundle

    def _bundle(self, args) -> ConfigBundle:
        bundle = self.bundle or (load_config(args.config) if args.config else validate_bundle(ConfigBundle()))
        if args.seed is not None:
            bundle = bundle.replace(sim=replace(bundle.sim, seed=args.seed))
        if args.grid:
            bundle = bundle.replace(scan=replace(bundle.scan, detunings=parse_grid(args.grid)))
        return bundle

    async def command(self, args):
        """
        Dispatch a parsed command line. Returns {'output': text} on success or
        {'error': message, 'kind': 'validation' | 'runtime'}.
        """
        try:
            bundle = self._bundle(args)
            cmd = args.command
            if cmd == 'theory':
                return self.theory(bundle, args)
            elif cmd == 'cool':
                return self.cool(bundle, args)
            elif cmd == 'scan-temp':
                return await self.scan_temp(bundle, args)
            elif cmd == 'scan-line':
                return await self.scan_line(bundle, args)
            elif cmd == 'image':
                return self.image(bundle, args)
            elif cmd == 'fit-line':
                return self.fit_line(bundle, args)
            else:
                return {'error': f'Unknown command: {cmd}', 'kind': 'validation'}
        except ValidationError as e:
            return {'error': str(e), 'kind': 'validation'}
        except (PulseCoolError, OSError, ValueError) as e:
            return {'error': f'{type(e).__name__}: {e}', 'kind': 'runtime'}

    def theory(self, bundle, args):
        atom, trap, laser = bundle.atom, bundle.trap, bundle.laser
        if args.summary:
            speed = theory.speed_from_energy(atom, 1.0 * EV)
            shift = theory.doppler_shift(atom, speed)
            broadening = theory.power_broadening_intensity(shift, atom.gamma, atom.saturation_intensity)
            lines = [
                f"temperature_floor_K={theory.temperature_floor(laser.tau):.9g}",
                f"optimal_detuning_over_2pi_hz={theory.optimal_detuning(laser.tau) / TWO_PI:.9g}",
                f"lineshape_fwhm_over_2pi_hz={theory.lineshape_fwhm(laser.tau) / TWO_PI:.9g}",
                f"cooling_rate_beta_over_m_hz={theory.cooling_rate(atom, laser):.9g}",
                f"equilibrium_shift_m={theory.linearize_force(atom, trap, laser).equilibrium_shift[0]:.9g}",
                f"residual_excitation={theory.residual_excitation(atom.lifetime, laser.rep_rate):.9g}",
                f"micromotion_ratio={theory.micromotion_ratio(trap, 0):.9g}",
                f"speed_at_1eV_mps={speed:.9g}",
                f"doppler_shift_at_1eV_over_2pi_hz={shift / TWO_PI:.9g}",
                f"power_broadening_consistent_W_m2={broadening:.9g}",
                f"power_broadening_as_quoted_W_m2={theory.power_broadening_as_quoted():.9g}",
            ]
            return {'output': "\n".join(lines) + "\n"}

        rows = []
        axes = list(bundle.scan.axes)
        for delta in bundle.scan.detunings:
            at = laser.with_detuning(delta)
            p_exc = theory.excitation_probability(at.rabi_angle, at.tau, delta)
            try:
                t_eq = theory.equilibrium_temperature(at.tau, delta)
                t_axis = theory.axis_equilibrium_temperature(at.tau, delta, at.beam_dir, at.rabi_angle)
                t_axis = float(np.mean(t_axis[axes]))
            except NoEquilibriumError:
                t_eq = t_axis = math.nan
            rows.append((delta, delta / TWO_PI, p_exc, theory.scatter_rate(atom, at), theory.scattering_force(atom, at),
                         theory.linearize_force(atom, trap, at).beta, theory.diffusion_power(atom, at, p_exc),
                         t_eq, t_axis))
        return {'output': csv_output.render_csv(THEORY_HEADER, rows)}

    def cool(self, bundle, args):
        sim = bundle.sim
        if args.pulses is not None:
            sim = replace(sim, n_pulses=args.pulses)
        if args.burn_in is not None:
            sim = replace(sim, burn_in_pulses=args.burn_in)
        if args.trajectory:
            sim = replace(sim, trajectory_stride=args.stride or sim.trajectory_stride or 1000)
        validate_bundle(bundle.replace(sim=sim))

        result = run(bundle.atom, bundle.trap, bundle.laser, sim)
        stats = result.stats
        laser = bundle.laser
        try:
            t_axis = theory.axis_equilibrium_temperature(laser.tau, laser.detuning, laser.beam_dir, laser.rabi_angle)
        except NoEquilibriumError:
            t_axis = np.full(3, math.nan)
        rows = [
            (str(axis), stats.temperature[axis], stats.temperature_err[axis], stats.kinetic_temperature[axis],
             stats.potential_temperature[axis], t_axis[axis], str(stats.total_scatters), str(sim.n_pulses),
             str(stats.burn_in_pulses))
            for axis in range(3)
        ]
        if args.trajectory:
            write_trajectory_csv(args.trajectory, result.trajectory)
        return {'output': csv_output.render_csv(COOL_HEADER, rows)}

    def _scan(self, bundle, args):
        scan = bundle.scan
        if args.trials is not None:
            scan = replace(scan, trials=args.trials)
        if args.pulses is not None:
            scan = replace(scan, pulses_per_trial=args.pulses)
        return scan

    async def scan_temp(self, bundle, args):
        scan = self._scan(bundle, args)
        rows = await temperature_scan_async(bundle, scan, threads=args.threads)
        if args.plot_data:
            csv_output.write_text(Path(args.plot_data) / "fig3a.csv", csv_output.temperature_plot_table(rows))
        if scan.temperature_csv and not args.out:
            csv_output.write_text(scan.temperature_csv, csv_output.temperature_table(rows))
        return {'output': csv_output.temperature_table(rows)}

    async def scan_line(self, bundle, args):
        scan = self._scan(bundle, args)
        rows = await lineshape_scan_async(bundle, scan, threads=args.threads)
        points = [(r.delta, r.rate_mc) for r in rows if not r.error]
        fit = None
        try:
            fit = fit_sech2(points)
        except PulseCoolError as e:
            logger.warning("no sech^2 fit of the scan: %s", e)
        if args.plot_data:
            csv_output.write_text(Path(args.plot_data) / "fig3b.csv", csv_output.lineshape_plot_table(rows, fit))
        if scan.lineshape_csv and not args.out:
            csv_output.write_text(scan.lineshape_csv, csv_output.lineshape_table(rows))
        return {'output': csv_output.lineshape_table(rows)}

    def image(self, bundle, args):
        imaging = bundle.imaging
        if args.mode:
            imaging = replace(imaging, crossection_mode=args.mode)
        if args.waist_mode:
            imaging = replace(imaging, waist_mode=args.waist_mode)
        if args.synthesize:
            if args.temperature is None or not args.out:
                raise ValidationError([Violation("image", None, "--synthesize needs --temperature and --out")])
            rng = np.random.default_rng(bundle.sim.seed)
            image = synthesize_image(bundle.trap, imaging, rng, temperature=args.temperature, mass=bundle.atom.mass)
            write_image(args.out, image)
            logger.info("synthesized image at %.4g K written to %s", args.temperature, args.out)
            return {'output': "", 'written': args.out}
        if args.analyze:
            image = read_image(args.analyze)
            if args.profile:
                profile = crossection(image, imaging.crossection_mode, imaging.slice_halfwidth)
                write_profile_csv(args.profile, profile.positions, profile.values)
            result = temperature_from_image(image, bundle.trap, imaging, mass=bundle.atom.mass)
            lines = [
                f"axis={result.axis}",
                f"temperature_K={result.temperature:.9g}",
                f"temperature_err_K={result.temperature_err:.9g}",
                f"x_im_m={result.x_im:.9g}",
                f"x_im_err_m={result.x_im_err:.9g}",
                f"x_rms_m={result.x_rms:.9g}",
                f"waist_mode={result.waist_mode.value}",
                f"closed_form_temperature_K={result.closed_form_temperature:.9g}",
            ]
            return {'output': "\n".join(lines) + "\n"}
        raise ValidationError([Violation("image", None, "give --synthesize or --analyze")])

    def fit_line(self, bundle, args):
        with open(args.points, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            column = next((c for c in ("rate_mc_hz", "rate_hz", "rate_theory_hz") if c in (reader.fieldnames or [])),
                          None)
            if "delta_rad_s" not in (reader.fieldnames or []) or column is None:
                raise ValidationError([Violation("points", args.points, "needs delta_rad_s and a rate column")])
            points = [(float(row["delta_rad_s"]), float(row[column])) for row in reader
                      if not row.get("error") and row[column] != "nan"]
        fit = fit_sech2(points)
        lines = [
            f"amplitude_hz={fit.amplitude:.9g}",
            f"tau_s={fit.tau:.9g}",
            f"tau_err_s={fit.tau_err:.9g}",
            f"center_offset_rad_s={fit.center_offset:.9g}",
            f"fwhm_rad_s={fit.fwhm:.9g}",
            f"fwhm_over_2pi_hz={fit.fwhm / TWO_PI:.9g}",
            f"residual_norm={fit.residual_norm:.9g}",
        ]
        return {'output': "\n".join(lines) + "\n"}
