# SPDX-License-Identifier: MIT

import io
import json
import os
from datetime import datetime

import pandas as pd
from jinja2 import Environment, FileSystemLoader
from markupsafe import Markup
from tabulate import tabulate

from qthermo.common import (
    Colors,
    clear_temporary_message,
    print_color,
    print_temporary_message,
    version,
    write_file,
)
from qthermo.thermo import LEDGER_COLUMNS

# Columns shown in the human readable summaries
SUMMARY_COLUMNS = ["t", "E", "E1", "E2", "S", "S1", "S2", "Q", "Q_ex", "Sigma"]
INVARIANT_HEADERS = ["Invariant", "Kind", "Enforced", "Checked", "Violations", "First", "Worst"]
BATCH_HEADERS = ["Scenario", "Status", "Rows", "Violations", "Errors"]


def ledger_dataframe(rows) -> pd.DataFrame:
    """Ledger rows as a dataframe in the documented column order"""
    return pd.DataFrame([r.as_dict() for r in rows], columns=list(LEDGER_COLUMNS), dtype=float)


def ledger_csv(rows) -> str:
    """CSV text of ledger rows, floats at 17 significant digits"""
    return ledger_dataframe(rows).to_csv(index=False, float_format="%.17g", lineterminator="\n")


def write_ledger_csv(rows, fname) -> None:
    write_file(fname, ledger_csv(rows))


def report_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_report_json(payload, fname) -> None:
    write_file(fname, report_json(payload))


def format_sci(val):
    """Format a float for the summaries"""
    if val is None:
        return "-"
    return f"{val:.3e}"


def format_enforced(val):
    return "yes" if val else "reported"


def format_seconds(val):
    return f"{val:.3f}s"


def invariant_rows(report) -> list:
    rows = []
    for name in sorted(report.invariants):
        s = report.invariants[name]
        rows.append(
            [
                name,
                s.kind,
                format_enforced(s.enforced),
                s.checked,
                s.violations,
                format_sci(s.first_violation),
                format_sci(s.worst),
            ]
        )
    return rows


def batch_rows(entries) -> list:
    return [
        [e["scenario"], e["status"], e["rows"], e["violations"], "; ".join(e["errors"])]
        for e in entries
    ]


def format_batch_table(entries, tablefmt="fancy_grid") -> str:
    return tabulate(batch_rows(entries), headers=BATCH_HEADERS, tablefmt=tablefmt)


class ScenarioReport:
    """Human readable summary of a run"""

    def __init__(self, report, fname, fmt):
        self.report = report
        self.fname = fname
        self.format = fmt
        self.df = ledger_dataframe(report.rows)
        self.energy_svg = None
        self.entropy_svg = None

    def summary_table(self) -> str:
        df = self.df[SUMMARY_COLUMNS]
        if self.format == "stdout":
            df = df.tail(1)
        if self.format == "md":
            return df.to_markdown(index=False, floatfmt=".6g")
        if self.format == "html":
            return Markup(df.to_html(index=False, table_id="summary", float_format="%.6g"))
        return tabulate(df, headers=df.columns, tablefmt="fancy_grid", showindex=False, floatfmt=".6g")

    def invariant_table(self):
        rows = invariant_rows(self.report)
        if self.format == "html":
            return [dict(zip(INVARIANT_HEADERS, row)) for row in rows]
        tablefmt = "pipe" if self.format == "md" else "fancy_grid"
        return tabulate(rows, headers=INVARIANT_HEADERS, tablefmt=tablefmt)

    def failure_data(self):
        failures = self.report.failures
        if self.format == "html":
            return [{"problem": f.get_description(), "data": str(f)} for f in failures]
        if not failures:
            return None
        if self.format == "stdout":
            return [f"🚦 {f.get_description()}" for f in failures]
        tablefmt = "pipe" if self.format == "md" else "fancy_grid"
        return tabulate(
            [[f.get_description(), str(f)] for f in failures],
            headers=["Problem", "Explanation"],
            tablefmt=tablefmt,
            maxcolwidths=[None, 60],
        )

    def equilibrium_data(self) -> list:
        out = []
        for kind in sorted(self.report.equilibrium):
            layers = self.report.equilibrium[kind]
            out.append(
                {
                    "kind": kind,
                    "necessary": layers["necessary_ok"],
                    "complementary": layers["complementary_ok"],
                    "sufficient": layers["sufficient_ok"],
                }
            )
        return out

    def build_template(self) -> str:
        """Build the summary using jinja2"""
        import qthermo  # pylint: disable=import-outside-toplevel

        p = os.path.dirname(qthermo.__file__)
        environment = Environment(
            loader=FileSystemLoader(os.path.join(p, "templates")),
            autoescape=self.format == "html",
        )
        template = environment.get_template(self.format)
        report = self.report
        if self.df.empty:
            summary = "No samples were recorded."
        else:
            summary = self.summary_table()
        context = {
            "name": report.name,
            "status": report.status,
            "error": report.error,
            "policy": report.policy,
            "dims": "×".join(str(d) for d in report.dims),
            "steps": report.steps,
            "rows": len(report.rows),
            "partition": report.partition,
            "violations": report.violations,
            "projections": report.projections,
            "first_law": format_sci(report.max_first_law_residual),
            "elapsed": format_seconds(report.elapsed),
            "summary": summary,
            "invariants": self.invariant_table(),
            "failures": self.failure_data(),
            "equilibrium": self.equilibrium_data(),
            "date": datetime.now(),
            "version": version(),
            "energy_svg": self.energy_svg,
            "entropy_svg": self.entropy_svg,
        }
        if self.fname:
            write_file(self.fname, template.render(context))
            return f"Summary written to {self.fname}"
        return template.render(context)

    def _chart(self, columns, ylabel) -> str:
        import matplotlib  # pylint: disable=import-outside-toplevel

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt  # pylint: disable=import-outside-toplevel
        import seaborn as sns  # pylint: disable=import-outside-toplevel

        plt.set_loglevel("warning")
        fig, ax = plt.subplots()
        data = self.df.melt(id_vars="t", value_vars=columns, var_name="quantity")
        sns.lineplot(data=data, x="t", y="value", hue="quantity", ax=ax)
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.ticklabel_format(axis="y", style="plain", useOffset=False)
        svg = io.BytesIO()
        fig.savefig(svg, format="svg")
        plt.close(fig)
        svg.seek(0)
        return svg.read().decode("utf-8")

    def build_energy_chart(self):
        """Energies of the parts over time"""
        self.energy_svg = Markup(self._chart(["E", "E1", "E2", "E12"], "Energy"))

    def build_entropy_chart(self):
        """Entropies and the entropy production over time"""
        self.entropy_svg = Markup(self._chart(["S", "S1", "S2", "Sigma"], "Entropy"))

    def run(self):
        """Render the summary and echo it to the console"""
        characters = print_temporary_message("Building summary, please wait...")
        if len(self.df.index) > 1 and self.format == "html":
            self.build_energy_chart()
            self.build_entropy_chart()
        msg = self.build_template()
        clear_temporary_message(characters)
        for line in msg.split("\n"):
            color = Colors.OK
            text = line.rstrip()
            if not text.strip():
                continue
            for group in ["🗣️", "❌", "🚦", "🦟", "🚫", "💯", "○", "✅"]:
                if line.startswith(group):
                    text = line.split(group)[-1].strip()
                    color = group
                    break
            print_color(text, color)
