"""
Helper functions for the weylgeom package.

Copyright (c) 2026, weylgeom contributors
All rights reserved.

You should have received a copy of the 3-Clause BSD License along with this
program. If not, see <https://opensource.org/licenses/BSD-3-Clause>
"""

import json
import os
import os.path as osp
import signal
from tempfile import mkstemp


def available_cpu_cores():
    # This process may be restricted to a subset of the cores on the machine;
    # sched_getaffinity() tells us which on some Unix flavours (inc Linux)
    if hasattr(os, 'sched_getaffinity'):
        return len(os.sched_getaffinity(0))
    else:
        # Fallback, inc on Windows
        ncpu = os.cpu_count() or 2
        return min(ncpu, 8)


def ignore_sigint():
    # Used in child processes to prevent them from receiving KeyboardInterrupt
    signal.signal(signal.SIGINT, signal.SIG_IGN)


def atomic_dump(obj, path, **kwargs):
    """Write JSON to a file atomically

    Readers never see a half-written report, even with several processes
    writing to the same path.
    """
    dirname, basename = osp.split(osp.abspath(path))
    fd, tmp_filename = mkstemp(dir=dirname, prefix=basename)
    try:
        with open(fd, 'w') as f:
            json.dump(obj, f, **kwargs)
            f.write('\n')
    except:
        os.unlink(tmp_filename)
        raise

    os.replace(tmp_filename, path)


def format_real(value):
    """Text form of a real with 17 significant digits"""
    return '%.17g' % value
