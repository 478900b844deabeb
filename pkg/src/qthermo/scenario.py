# SPDX-License-Identifier: MIT
"""Scenario runner for quantum thermodynamics simulations"""
import argparse
import os
import sys

from qthermo.common import ThermoTool, print_color, show_log_info, version
from qthermo.config import ScenarioConfig, default_output_dir, dump, load, resolve, validate
from qthermo.errors import ConfigError, QthermoError
from qthermo.run_report import ScenarioReport, format_batch_table, write_report_json
from qthermo.runner import ScenarioRunner, run_batch


class Defaults:
    """Default values for the script"""

    jobs = 1
    format = "stdout"
    format_choices = ["txt", "md", "html", "stdout"]
    batch_report = "batch_report.json"


class Headers:
    """Headers for the script"""

    ScenarioDescription = "Scenario file (JSON)"
    GlobDescription = "Glob pattern matching scenario files (quote it)"
    OutDescription = (
        "Output directory (default $QTHERMO_OUTPUT_DIR, else ./qthermo-output)"
    )
    JobsDescription = "How many scenarios to run in parallel"
    FormatDescription = "What format to output the summary in"
    ResolvedDescription = "Write the scenario with every default filled in to this file"


def get_output_dir(out) -> str:
    return out or default_output_dir()


def get_summary_file(out_dir, fmt) -> str:
    if fmt == "stdout":
        return ""
    return os.path.join(out_dir, f"summary.{fmt}")


def validate_scenario(fname, resolved, tool_debug) -> bool:
    """Validate a scenario file and list every problem"""
    ThermoTool("qthermo" if tool_debug else None)
    payload = load(fname)
    errors = validate(payload)
    if errors:
        for error in errors:
            print_color(error, "❌")
        print_color(f"{fname} has {len(errors)} problem(s)", "🚫")
        return False
    if resolved:
        dump(resolve(payload), resolved)
        print_color(f"Resolved scenario written to {resolved}", "○")
    print_color(f"{fname} is valid", "✅")
    return True


def run_scenario(fname, out, fmt, tool_debug) -> bool:
    """Run one scenario and summarize it"""
    config = ScenarioConfig.from_file(fname)
    out_dir = get_output_dir(out)
    report = ScenarioRunner(config, out_dir, tool_debug).run()
    ScenarioReport(report, get_summary_file(out_dir, fmt), fmt).run()
    print_color(f"Ledger and report written to {out_dir}", "○")
    return report.exit_code == 0


def batch_scenarios(pattern, out, jobs, tool_debug) -> bool:
    """Run every matching scenario and aggregate the outcome"""
    ThermoTool("qthermo" if tool_debug else None)
    out_dir = get_output_dir(out)
    entries = run_batch(pattern, out_dir, jobs)
    os.makedirs(out_dir, exist_ok=True)
    write_report_json({"scenarios": entries}, os.path.join(out_dir, Defaults.batch_report))
    print(format_batch_table(entries))
    failed = [e for e in entries if e["status"] != "ok"]
    if failed:
        print_color(f"{len(failed)} of {len(entries)} scenario(s) failed", "🚫")
        return False
    print_color(f"{len(entries)} scenario(s) completed", "💯")
    return True


def parse_args():
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="Run quantum thermodynamics scenarios and check their invariants",
        epilog="Each run writes a ledger CSV and a JSON report into the output directory.",
    )
    subparsers = parser.add_subparsers(help="Possible commands", dest="action")

    validate_cmd = subparsers.add_parser("validate", help="Validate a scenario file")
    validate_cmd.add_argument("scenario", help=Headers.ScenarioDescription)
    validate_cmd.add_argument("--resolved", help=Headers.ResolvedDescription)
    validate_cmd.add_argument(
        "--tool-debug",
        action="store_true",
        help="Enable tool debug logging",
    )

    run_cmd = subparsers.add_parser("run", help="Run a scenario")
    run_cmd.add_argument("scenario", help=Headers.ScenarioDescription)
    run_cmd.add_argument("--out", help=Headers.OutDescription)
    run_cmd.add_argument(
        "--format",
        choices=Defaults.format_choices,
        default=Defaults.format,
        help=Headers.FormatDescription,
    )
    run_cmd.add_argument(
        "--tool-debug",
        action="store_true",
        help="Enable tool debug logging",
    )

    batch_cmd = subparsers.add_parser("batch", help="Run many scenarios")
    batch_cmd.add_argument("pattern", help=Headers.GlobDescription)
    batch_cmd.add_argument("--out", help=Headers.OutDescription)
    batch_cmd.add_argument(
        "--jobs", type=int, default=Defaults.jobs, help=Headers.JobsDescription
    )
    batch_cmd.add_argument(
        "--tool-debug",
        action="store_true",
        help="Enable tool debug logging",
    )

    parser.add_argument(
        "--version", action="store_true", help="Show version information"
    )

    if len(sys.argv) == 1:
        parser.print_help(sys.stderr)
        sys.exit(1)

    return parser.parse_args()


def main() -> None | int:
    """Main function"""
    args = parse_args()
    ret = False
    try:
        if args.action == "validate":
            ret = validate_scenario(args.scenario, args.resolved, args.tool_debug)
        elif args.action == "run":
            ret = run_scenario(args.scenario, args.out, args.format, args.tool_debug)
        elif args.action == "batch":
            if args.jobs < 1:
                raise ConfigError(f"--jobs must be at least 1, got {args.jobs}")
            ret = batch_scenarios(args.pattern, args.out, args.jobs, args.tool_debug)
        elif args.version:
            print(version())
            return
        else:
            sys.exit("no action specified")
    except ConfigError as e:
        for error in e.errors:
            print_color(error, "❌")
    except (QthermoError, OSError) as e:
        print_color(str(e), "❌")
    show_log_info()
    if ret is False:
        return 1
    return
