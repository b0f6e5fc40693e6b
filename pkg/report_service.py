# Renders a RiskReport three ways:
#   1. bench text report: key=value header + per-n table (reproducible, no timings)
#   2. bench CSV: n, risk_mean, risk_se, kept_fraction, alpha_theory, slope_fit
#   3. bench summary PDF: the same numbers plus the run audit (timings, machine)

import os
from datetime import datetime
from io import BytesIO

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle
from reportlab.lib.units import cm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

import config
from utils.file_io import atomic_write_bytes, atomic_write_text, write_rows_csv

CSV_COLUMNS = ["n", "risk_mean", "risk_se", "kept_fraction", "alpha_theory", "slope_fit"]

# ── Colour palette ─────────────────────────────────────────────────────────────
NAVY       = colors.HexColor("#1A2B4A")
TEAL       = colors.HexColor("#0D7377")
SOFT_RED   = colors.HexColor("#D64045")
LIGHT_GREY = colors.HexColor("#F5F5F5")
MID_GREY   = colors.HexColor("#888888")
DARK_GREY  = colors.HexColor("#333333")
WHITE      = colors.white


def _g(x: float) -> str:
    return "%.17g" % x


# ── Text + CSV ─────────────────────────────────────────────────────────────────

def render_text_report(report, plan) -> str:
    b = plan.besov
    header = [
        ("B", _g(plan.B)),
        ("levels", f"0..{plan.top_level}"),
        ("besov_r", _g(b.r)), ("besov_pi", _g(b.pi)), ("besov_q", _g(b.q)), ("besov_M", _g(b.M)),
        ("loss_p", _g(plan.loss_p)),
        ("kappa", _g(report.kappa)), ("kappa_calibrated", str(report.kappa_calibrated).lower()),
        ("eta", _g(plan.eta)), ("p_stat", str(plan.p_stat)), ("block_norm", plan.block_norm),
        ("replications", str(plan.replications)), ("seed", str(plan.seed)),
        ("truths", str(1 if plan.fixed_truth else plan.truths_per_n)), ("truth_profile", plan.truth_profile),
        ("fixed_truth", str(plan.fixed_truth).lower()), ("noiseless", str(plan.noiseless).lower()),
        ("zone", report.zone),
        ("alpha_theory", _g(report.alpha_theory)),
        ("slope_fit", _g(report.slope_fit)),
        ("intercept", _g(report.intercept)),
        ("r_squared", _g(report.r_squared)),
        ("fit_flagged", str(report.fit_flagged).lower()),
    ]
    lines = ["# needlet block-threshold risk report"]
    lines += [f"{k}={v}" for k, v in header]
    lines.append("")
    lines.append("n risk_mean risk_se worst_risk kept_fraction")
    for row in zip(report.n_grid, report.risk_mean, report.risk_se, report.worst_risk, report.kept_fraction):
        lines.append(" ".join([str(row[0])] + [_g(x) for x in row[1:]]))
    return "\n".join(lines) + "\n"


def csv_rows(report) -> list[list[str]]:
    return [
        [str(n), _g(m), _g(s), _g(k), _g(report.alpha_theory), _g(report.slope_fit)]
        for n, m, s, k in zip(report.n_grid, report.risk_mean, report.risk_se, report.kept_fraction)
    ]


def save_bench_outputs(report, plan, csv_path: str, report_path: str) -> tuple[str, str]:
    write_rows_csv(csv_path, CSV_COLUMNS, csv_rows(report))
    atomic_write_text(report_path, render_text_report(report, plan))
    return csv_path, report_path


# ── PDF ────────────────────────────────────────────────────────────────────────

def _make_styles() -> dict:
    return {
        "title":   ParagraphStyle("Title",   fontName="Helvetica-Bold", fontSize=18, textColor=NAVY,      spaceAfter=4),
        "section": ParagraphStyle("Section", fontName="Helvetica-Bold", fontSize=12, textColor=NAVY,      spaceBefore=14, spaceAfter=5),
        "body":    ParagraphStyle("Body",    fontName="Helvetica",      fontSize=9,  textColor=DARK_GREY, spaceAfter=5, leading=14),
        "label":   ParagraphStyle("Label",   fontName="Helvetica-Bold", fontSize=9,  textColor=NAVY),
        "small":   ParagraphStyle("Small",   fontName="Helvetica",      fontSize=7,  textColor=MID_GREY,  spaceAfter=3),
        "flag":    ParagraphStyle("Flag",    fontName="Helvetica-Bold", fontSize=9,  textColor=SOFT_RED),
    }


def _two_col_table(data: list[tuple[str, str]], styles: dict) -> Table:
    """Label:value table."""
    rows = [[Paragraph(label, styles["label"]), Paragraph(str(value), styles["body"])] for label, value in data]
    t = Table(rows, colWidths=[5 * cm, 12 * cm])
    t.setStyle(TableStyle([
        ("ROWBACKGROUNDS", (0, 0), (-1, -1), [WHITE, LIGHT_GREY]),
        ("TOPPADDING",     (0, 0), (-1, -1), 4),
        ("BOTTOMPADDING",  (0, 0), (-1, -1), 4),
        ("LEFTPADDING",    (0, 0), (-1, -1), 8),
        ("GRID",           (0, 0), (-1, -1), 0.3, MID_GREY),
    ]))
    return t


def _risk_table(report) -> Table:
    rows = [["n", "mean risk", "MC s.e.", "worst group", "kept blocks"]]
    for n, m, s, w, k in zip(report.n_grid, report.risk_mean, report.risk_se, report.worst_risk, report.kept_fraction):
        rows.append([str(n), f"{m:.4e}", f"{s:.2e}", f"{w:.4e}", f"{k:.1%}"])
    t = Table(rows, colWidths=[2.5 * cm, 3.5 * cm, 3 * cm, 3.5 * cm, 3 * cm])
    t.setStyle(TableStyle([
        ("BACKGROUND",     (0, 0), (-1, 0), TEAL),
        ("TEXTCOLOR",      (0, 0), (-1, 0), WHITE),
        ("FONTNAME",       (0, 0), (-1, 0), "Helvetica-Bold"),
        ("FONTSIZE",       (0, 0), (-1, -1), 8),
        ("ROWBACKGROUNDS", (0, 1), (-1, -1), [WHITE, LIGHT_GREY]),
        ("GRID",           (0, 0), (-1, -1), 0.3, MID_GREY),
        ("ALIGN",          (0, 0), (-1, -1), "RIGHT"),
    ]))
    return t


def generate_bench_pdf(report, plan, audit=None) -> bytes:
    """
    One-page bench summary.

    Sections:
      1. Plan (Besov ball, loss, estimator constants)
      2. Risk per sample size
      3. Slope fit against the theoretical exponent
      4. Run audit (timings, threads, machine), when given
    """
    buffer = BytesIO()
    styles = _make_styles()
    doc = SimpleDocTemplate(buffer, pagesize=A4, leftMargin=2 * cm, rightMargin=2 * cm,
                            topMargin=2 * cm, bottomMargin=2 * cm)
    story = [
        Paragraph("Needlet block-threshold risk bench", styles["title"]),
        Paragraph(f"Generated: {datetime.now().strftime('%d %b %Y, %H:%M')}", styles["small"]),
        Spacer(1, 0.3 * cm),
    ]

    b = plan.besov
    story.append(Paragraph("Plan", styles["section"]))
    story.append(_two_col_table([
        ("Besov ball", f"r={b.r:g}, π={b.pi:g}, q={b.q:g}, M={b.M:g}"),
        ("Loss", f"p={plan.loss_p:g}"),
        ("Estimator", f"κ={report.kappa:g}{' (calibrated)' if report.kappa_calibrated else ''}, "
                      f"η={plan.eta:g}, p_stat={plan.p_stat}, B={plan.B:g}, blocks normalised by {plan.block_norm} size"),
        ("Levels", f"0..{plan.top_level}"),
        ("Replications", f"{plan.replications} per n, seed {plan.seed}"),
        ("Truths", "one fixed truth" if plan.fixed_truth else f"{plan.truths_per_n} {plan.truth_profile} truths, cycled over replications"),
    ], styles))

    story.append(Paragraph("Risk", styles["section"]))
    story.append(_risk_table(report))

    story.append(Paragraph("Rate", styles["section"]))
    story.append(_two_col_table([
        ("Zone", report.zone),
        ("Theoretical slope", f"{-report.alpha_theory:.4f}"),
        ("Fitted slope", f"{report.slope_fit:.4f}"),
        ("Relative error", f"{report.slope_error():.1%}"),
        ("R²", f"{report.r_squared:.4f}"),
    ], styles))
    if report.fit_flagged:
        story.append(Paragraph("R² below 0.9: the slope fit is not reliable.", styles["flag"]))

    if audit is not None:
        story.append(Paragraph("Run audit", styles["section"]))
        story.append(_two_col_table([(line.split(":")[0], line) for line in audit.summary_lines()], styles))

    doc.build(story)
    return buffer.getvalue()


def save_bench_pdf(report, plan, audit=None, directory: str = config.REPORTS_DIR) -> str:
    """Save the bench PDF under a timestamped name and return its path."""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    path = os.path.join(directory, f"bench_summary_{timestamp}.pdf")
    return atomic_write_bytes(path, generate_bench_pdf(report, plan, audit))
