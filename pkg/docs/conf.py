# Sphinx configuration of the bbp-homodyne documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join("..", "src")))

import bbp_homodyne


# -- Project information -----------------------------------------------------

project = bbp_homodyne.__name__
copyright = bbp_homodyne.__license__
author = bbp_homodyne.__author__
version = bbp_homodyne.__version__
release = f"{bbp_homodyne.__status__}-{bbp_homodyne.__version__}"


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
]
templates_path = ["_templates"]
language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# Signatures of the physics functions are long (spec, state, deltas, verbose...).
autodoc_typehints = "description"
autodoc_member_order = "bysource"
add_module_names = False


# -- Options for HTML output -------------------------------------------------

html_theme = "press"
html_static_path = ["_static"]


# -- Extension configuration -------------------------------------------------

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}
