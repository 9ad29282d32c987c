import os
import sys

# Run straight from a build tree: the CMake-built extension directory and
# the python package sources go on sys.path (no pip install needed).
py_src = os.environ.get("GRIDCEP_PY_SRC")
ext_dir = os.environ.get("GRIDCEP_EXT_DIR")
if py_src:
    sys.path.insert(0, py_src)
if ext_dir:
    sys.path.insert(0, ext_dir)
