"""Kernel backend selection.

The compiled extension is preferred when present; `CQP_KERNELS=py` forces
the numpy fallback, `CQP_KERNELS=cy` fails loudly if the extension is
missing. Both backends expose the same functions with identical semantics.
"""

import os

_choice = os.environ.get("CQP_KERNELS", "auto")

if _choice == "py":
    from cqp.qstate import _kernels_py as _impl
elif _choice == "cy":
    from cqp.qstate import _kernels_cy as _impl  # type: ignore[no-redef]
else:
    try:
        from cqp.qstate import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from cqp.qstate import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND_NAME

apply_unitary = _impl.apply_unitary
measure_probs = _impl.measure_probs
project_outcome = _impl.project_outcome
reduced_density = _impl.reduced_density
phase_fix = _impl.phase_fix
