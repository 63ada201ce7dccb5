from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from eqmirror.novikov import NovikovScalar

console = Console(stderr=True)


def _text(value):
    if isinstance(value, NovikovScalar):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "({})".format(", ".join(_text(v) for v in value))
    if isinstance(value, float):
        return "{:.3g}".format(value)
    return "{}".format(value)


def brane_panel(row, index):
    grid = Table.grid(expand=True)
    grid.add_column(style="cyan")
    grid.add_column(justify="right", style="magenta")
    grid.add_row("Root", _text(row["root"]))
    grid.add_row("u", _text(row["u"]))
    grid.add_row("Curvature", _text(row["curvature"]))
    grid.add_row("m1", _text(row["m1"]))
    grid.add_row("m2", _text(row["m2"]))
    grid.add_row("Homs", _text(row["homs"]))
    if "clifford" in row:
        grid.add_row("[e1].[e1]", _text(row["clifford"]["product"]))
        grid.add_row("Clifford", _text(row["clifford"]["parameter"]))
        grid.add_row("Match", "{}".format(row["clifford"]["match"]))
    else:
        for (k, value) in enumerate(row["ladder"]):
            grid.add_row("d^{}F".format(k), _text(value))

    return Panel(grid, title="Brane {}".format(index))


def mirror_panels(report):
    header = Table.grid(expand=True)
    header.add_column(style="cyan")
    header.add_column(justify="right", style="magenta")
    header.add_row("Geometry", report["geometry"])
    header.add_row("Lambda", _text(report["lambda"]))
    header.add_row("Precision", _text(report["precision"]))
    if "vieta" in report:
        header.add_row("Vieta Sum", _text(report["vieta"]["sum"]))
        header.add_row("Vieta Product", _text(report["vieta"]["product"]))

    panels = [Panel(header, title="Mirror")]
    panels += [brane_panel(row, i) for (i, row) in enumerate(report["rows"])]
    return panels


def tropical_table(report):
    table = Table(title="Tropical critical points, eps_P = {}".format(_text(report["epsilon"])))
    table.add_column("Cone", justify="right", style="cyan", no_wrap=True)
    table.add_column("Valuations", style="magenta")
    table.add_column("Point", style="magenta")
    table.add_column("Margin", style="green")
    table.add_column("Certificate", style="green")
    table.add_column("Lift", style="green")

    for row in report["points"]:
        table.add_row(
            _text(row["cone"]),
            _text(row["valuations"]),
            _text(row["point"]),
            _text(row["margin"]),
            _text(row.get("certificate", "")),
            _text(row.get("lift", "")),
        )
    return table


def check_table(report):
    status = "passed" if report["passed"] else "FAILED"
    table = Table(title="{} ({})".format(report["check"], status))
    table.add_column("Key", justify="right", style="cyan", no_wrap=True)
    table.add_column("Residual", style="green")

    for row in report["residuals"]:
        style = "red" if row["residual"] > report["tolerance"] else None
        table.add_row(row["key"], _text(row["residual"]), style=style)
    return table


def summary_panel(title, report):
    grid = Table.grid(expand=True)
    grid.add_column(style="cyan")
    grid.add_column(justify="right", style="magenta")
    for (key, value) in sorted(report.items()):
        grid.add_row(key, _text(value))
    return Panel(grid, title=title)


def render(command, report):
    if command == "mirror":
        for panel in mirror_panels(report):
            console.print(panel)
    elif command == "tropical":
        console.print(tropical_table(report))
    elif "residuals" in report:
        console.print(check_table(report))
    elif "reports" in report:
        for child in report["reports"]:
            console.print(check_table(child))
    else:
        console.print(summary_panel(command, report))
