"""CSV tables for scans and plot data.

Numbers are written with 9 significant digits through str.format, which
does not depend on the locale; missing values are `nan`.
"""

import csv
import io
import logging
import math
from pathlib import Path

from pulsecool.harness.lineshape import sech2_line
from pulsecool.model.constants import TWO_PI

logger = logging.getLogger(__name__)

TEMPERATURE_HEADER = ["delta_rad_s", "delta_over_2pi_hz", "T_mc_K", "T_mc_err_K", "T_theory_K",
                      "T_axis_theory_K", "error"]
LINESHAPE_HEADER = ["delta_rad_s", "rate_theory_hz", "rate_mc_hz", "rate_mc_err_hz", "error"]
TEMPERATURE_PLOT_HEADER = ["delta_over_2pi_ghz", "T_mc_K", "T_mc_err_K", "T_theory_K"]
LINESHAPE_PLOT_HEADER = ["delta_over_2pi_ghz", "rate_mc_hz", "rate_mc_err_hz", "rate_fit_hz"]


def fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.9g}"


def render_csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])
    return buffer.getvalue()


def temperature_table(rows) -> str:
    return render_csv(TEMPERATURE_HEADER, [
        (r.delta, r.delta / TWO_PI, r.t_mc, r.t_mc_err, r.t_theory, r.t_axis_theory, r.error) for r in rows
    ])


def lineshape_table(rows) -> str:
    return render_csv(LINESHAPE_HEADER, [
        (r.delta, r.rate_theory, r.rate_mc, r.rate_mc_err, r.error) for r in rows
    ])


def temperature_plot_table(rows) -> str:
    return render_csv(TEMPERATURE_PLOT_HEADER, [
        (r.delta / TWO_PI / 1e9, r.t_mc, r.t_mc_err, r.t_theory) for r in rows
    ])


def lineshape_plot_table(rows, fit=None) -> str:
    def fitted(delta):
        return float(sech2_line(delta, fit.amplitude, fit.tau, fit.center_offset)) if fit else math.nan

    return render_csv(LINESHAPE_PLOT_HEADER, [
        (r.delta / TWO_PI / 1e9, r.rate_mc, r.rate_mc_err, fitted(r.delta)) for r in rows
    ])


def write_text(path, text: str):
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("wrote %s", path)
