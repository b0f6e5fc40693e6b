from audit_trail import BenchAudit
from bench.risk_bench import BenchPlan, RiskReport
from needlets.besov_models import BesovParams
from report_service import CSV_COLUMNS, csv_rows, generate_bench_pdf, render_text_report, save_bench_outputs


def _plan() -> BenchPlan:
    return BenchPlan(besov=BesovParams(r=2, pi=2, q=2), n_grid=[256, 1024, 4096, 16384], replications=100)


def _report(flagged=False) -> RiskReport:
    return RiskReport(
        n_grid=[256, 1024, 4096, 16384], risk_mean=[0.024, 0.0125, 0.0035, 0.00124],
        risk_se=[0.002, 0.001, 0.0003, 0.0001], worst_risk=[0.03, 0.015, 0.004, 0.0015],
        kept_fraction=[0.1, 0.2, 0.2, 0.25], alpha_theory=2 / 3, zone="regular",
        slope_fit=-0.72, intercept=0.3, r_squared=0.97 if not flagged else 0.5, fit_flagged=flagged,
        kappa=0.75, kappa_calibrated=True,
    )


class TestTextAndCsv:

    def test_text_report_layout(self):
        text = render_text_report(_report(), _plan())
        lines = text.splitlines()
        assert lines[0].startswith("#")
        assert "zone=regular" in lines
        assert "levels=0..7" in lines
        assert "alpha_theory=0.66666666666666663" in lines
        assert "kappa=0.75" in lines
        assert "kappa_calibrated=true" in lines
        assert "block_norm=effective" in lines
        assert "truths=8" in lines
        table = lines[lines.index("n risk_mean risk_se worst_risk kept_fraction") + 1:]
        assert len(table) == 4
        assert table[0].split()[0] == "256"

    def test_csv_rows(self):
        rows = csv_rows(_report())
        assert len(rows) == 4
        assert all(len(r) == len(CSV_COLUMNS) for r in rows)
        assert rows[2][0] == "4096"
        assert float(rows[0][5]) == -0.72

    def test_outputs_are_reproducible(self, tmp_path):
        first = save_bench_outputs(_report(), _plan(), str(tmp_path / "a.csv"), str(tmp_path / "a.txt"))
        second = save_bench_outputs(_report(), _plan(), str(tmp_path / "b.csv"), str(tmp_path / "b.txt"))
        for x, y in zip(first, second):
            with open(x, "rb") as fx, open(y, "rb") as fy:
                assert fx.read() == fy.read()
        with open(first[0]) as f:
            assert f.readline().strip() == ",".join(CSV_COLUMNS)


class TestPdf:

    def test_pdf_renders(self):
        audit = BenchAudit(command="bench", seed=0, threads=2)
        audit.start("replications")
        audit.stop("replications")
        audit.warn("slope fit R² = 0.500 is below 0.9")
        pdf = generate_bench_pdf(_report(flagged=True), _plan(), audit)
        assert pdf.startswith(b"%PDF")

    def test_pdf_without_audit(self):
        assert generate_bench_pdf(_report(), _plan()).startswith(b"%PDF")
