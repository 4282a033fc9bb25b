import argparse
import json
import logging
import os
import subprocess
import sys
import threading
import webbrowser
from time import sleep
from typing import List, Optional

from utils.census import PAPER_MODE, RIBBON_MODE, incidence_from_tables
from utils.config import REPO_ROOT, settings
from utils.errors import MapError
from utils.golden import Correspondence, load_correspondence, relabel_tables
from utils.map_core import canonical_code, map_from_dict
from utils.orders import BLACK_RULES, WHITE_RULES
from utils.reports import TABLE_FORMATS, dump_json, incidence_dot, render_table, write_text
from utils.workbench import SOURCES, Workbench

logger = logging.getLogger("mapwork")

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_ERROR = 2


def _correspondence(bench: Workbench, path: Optional[str]) -> Optional[Correspondence]:
    if not path:
        return None
    return load_correspondence(path, bench.m33().ids(), bench.m446().ids())


def cmd_catalog(bench: Workbench, args) -> int:
    catalog = bench.catalog(args.kind)
    if args.out:
        write_text(args.out, dump_json(catalog.to_dict()))
    print(f"{args.kind}: {len(catalog)} classes")
    if args.kind == "m446":
        pairing = bench.pairing()
        logger.info(f"{len(pairing.pairs)} pairs, {len(pairing.singletons)} singletons: {list(pairing.singletons)}")
    expected = settings.EXPECTED_M33 if args.kind == "m33" else settings.EXPECTED_M446
    if args.strict and len(catalog) != expected:
        logger.error(f"{args.kind} has {len(catalog)} classes, expected {expected}")
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_tables(bench: Workbench, args) -> int:
    if args.source == "golden":
        if args.paper_map:
            raise ValueError("--paper-map relabels computed tables only; the golden tables already carry published labels")
        tables = bench.golden().raw if args.which in (1, 2) else bench.golden().reduced
    else:
        tables = bench.raw_tables() if args.which in (1, 2) else bench.reduced_tables()
        correspondence = _correspondence(bench, args.paper_map)
        if correspondence is not None:
            tables = relabel_tables(tables, correspondence)
    write_text(args.out, render_table(tables, args.which, args.format))
    return EXIT_OK


def cmd_census(bench: Workbench, args) -> int:
    report = bench.census(mode=args.mode, source=args.source, path=args.tables, jobs=args.jobs, chunk=args.chunk)
    write_text(args.out, dump_json(report.to_dict(timing=args.timing)))
    logger.info(
        f"{report.mode} census: {report.fork_count} forks, faces {report.face_counts}, "
        f"{report.parity_violations} parity violations, {len(report.obstructions)} obstructions"
    )
    logger.info(report.claim_summary())
    if args.strict and (report.fork_count != settings.EXPECTED_FORKS or not report.matches_claim()):
        logger.error(f"census disagrees with the expected forks={settings.EXPECTED_FORKS} "
                     f"faces={sorted(settings.EXPECTED_FACES)}")
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_compare(bench: Workbench, args) -> int:
    report = bench.compare(_correspondence(bench, args.paper_map), census_mode=args.census_mode, jobs=args.jobs)
    write_text(args.out, dump_json(report.to_dict()))
    if args.write_map:
        write_text(args.write_map, report.bijection.correspondence.to_csv())
    for stage in report.stages:
        logger.info(f"{stage.stage}: {stage.summary()}")
    if report.census is not None:
        logger.info(f"census: {report.census.summary()}")
        logger.info(f"published: {report.census.golden.claim_summary()}")
    if args.strict and not report.ok:
        logger.error("comparison found differences beyond the allowed Eulerian freedom")
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_export(bench: Workbench, args) -> int:
    if args.what == "dot":
        g = incidence_from_tables(bench.tables(args.source, args.tables))
        write_text(args.out, incidence_dot(g))
    elif args.what == "map":
        if not args.id:
            raise ValueError("export map needs --id")
        kind = "m33" if args.id.startswith("W") else "m446"
        write_text(args.out, dump_json(bench.catalog(kind).get(args.id).to_dict()))
    elif args.what == "tables":
        write_text(args.out, dump_json(bench.tables(args.source, args.tables).to_dict()))
    return EXIT_OK


def cmd_check_map(bench: Workbench, args) -> int:
    """Print the canonical code of a map JSON file"""
    with open(args.file, encoding="utf-8") as f:
        data = json.load(f)
    m = map_from_dict(data.get("map", data))
    print(canonical_code(m).text)
    return EXIT_OK


def run_app(port: int = 8501, open_browser: bool = True) -> int:
    """Run the Streamlit workbench"""
    print("Starting map workbench...")
    url = f"http://localhost:{port}"
    print(f"Workbench will be available at: {url}")

    def launch_browser():
        sleep(2)
        webbrowser.open(url)

    if open_browser:
        threading.Thread(target=launch_browser, daemon=True).start()
    app_path = os.path.join(REPO_ROOT, "app.py")
    return subprocess.run([sys.executable, "-m", "streamlit", "run", app_path, "--server.port", str(port)]).returncode


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run.py", description="Plane-map / M(4,4,6) workbench")
    parser.add_argument("--log-level", default=None, help="logging level (default from MAPWORK_LOG_LEVEL)")
    parser.add_argument("--white-rule", choices=sorted(WHITE_RULES), default=None)
    parser.add_argument("--black-rule", choices=sorted(BLACK_RULES), default=None)
    parser.add_argument("--shuffle-seed", type=int, default=None,
                        help="randomize Eulerian tie-breaks with this seed")
    parser.add_argument("--golden", default=None, help="golden bundle JSON (default data/golden_tables.json)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="build a catalog and print its size")
    p.add_argument("kind", choices=["m33", "m446"])
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("tables", help="emit one of the four word tables")
    p.add_argument("--which", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--format", choices=TABLE_FORMATS, default="md")
    p.add_argument("--paper-map", default=None, help="CSV of our_id,label lines (computed tables only)")
    p.add_argument("--source", choices=["computed", "golden"], default="computed")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("census", help="trace every fork resolution")
    p.add_argument("--mode", choices=[PAPER_MODE, RIBBON_MODE], default=PAPER_MODE)
    p.add_argument("--source", choices=SOURCES, default="computed")
    p.add_argument("--tables", default=None, help="tables JSON for --source file")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--chunk", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="include runtime in the report")
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("compare", help="diff computed tables against the golden bundle")
    p.add_argument("--paper-map", default=None, help="use this correspondence instead of searching one")
    p.add_argument("--census-mode", choices=[PAPER_MODE, RIBBON_MODE], default=None,
                   help="census our tables and the golden ones, diff them and check the face counts")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--write-map", default=None, help="write the correspondence used as CSV")
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export", help="export DOT or JSON artifacts")
    p.add_argument("what", choices=["dot", "map", "tables"])
    p.add_argument("--id", default=None, help="class id for 'map'")
    p.add_argument("--source", choices=SOURCES, default="computed")
    p.add_argument("--tables", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("code", help="canonical code of a map JSON file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check_map)

    p = sub.add_parser("app", help="launch the Streamlit workbench")
    p.add_argument("--port", type=int, default=8501)
    p.add_argument("--no-browser", action="store_true")
    p.set_defaults(func=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.command == "app":
        return run_app(args.port, not args.no_browser)
    bench = Workbench(args.white_rule, args.black_rule, args.shuffle_seed, args.golden)
    try:
        return args.func(bench, args)
    except (MapError, ValueError, OSError) as e:
        logger.error(f"Error in {args.command}: {str(e)}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
