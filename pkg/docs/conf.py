# Sphinx configuration for the NSATP docs

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

import nsatp  # noqa: E402,F401

project = 'NSATP'
copyright = "2026, NSATP developers"
author = 'NSATP developers'

extensions = [
    'sphinx.ext.autosummary',
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    'sphinx.ext.intersphinx',
]

autosummary_generate = True
autodoc_member_order = 'bysource'

# docstrings use the Args:/Returns: layout
napoleon_google_docstring = True
napoleon_numpy_docstring = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'torch': ('https://pytorch.org/docs/stable', None),
}

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'nsatpdoc'
