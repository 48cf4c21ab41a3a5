"""Builds the cantus._core extension from the C++ sources."""

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

CORE_SOURCES = [
    "src/note.cpp",
    "src/melody_model.cpp",
    "src/features.cpp",
    "src/fragment_db.cpp",
    "src/lyrics.cpp",
    "src/midi_io.cpp",
    "src/metrics.cpp",
    "src/compose.cpp",
    "src/config.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "cantus._core",
            ["python/bindings.cpp"] + CORE_SOURCES,
            include_dirs=["include"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
