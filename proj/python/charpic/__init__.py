"""Picard schemes for u_xy = f(x, y, u, u_x, u_y) with mixed boundary data.

The heavy lifting lives in the compiled extension ``charpic._core``; this
package re-exports its functions and adds a small JSON convenience wrapper.
"""

import json as _json

from ._core import (  # noqa: F401
    __version__,
    bessel_series,
    classify,
    demo_nonuniqueness,
    estimate_lipschitz,
    eval_expr,
    pretty_print,
    run,
)


def run_config(subcommand, config, out_dir):
    """Run a solver subcommand with ``config`` given as a dict.

    Returns the parsed ``report.json`` dict; raises RuntimeError on a
    validation failure (exit code 2).
    """
    code, report = run(subcommand, _json.dumps(config), str(out_dir))
    doc = _json.loads(report) if report else {}
    if code == 2:
        raise RuntimeError(f"validation failed: {doc.get('errors')}")
    doc["exit_code"] = code
    return doc
