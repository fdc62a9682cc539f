"""Bridge packages for sandboxed programs.

This directory is prepended to the program's PYTHONPATH, so the ``pysat``
package below shadows any installed library of that name inside the
sandbox and routes solving through the external solver command instead.
"""
