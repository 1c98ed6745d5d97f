# -*- coding: utf-8 -*-
#
# weylgeom documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
]

templates_path = ['_templates']

source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'weylgeom'
copyright = u'2026, weylgeom contributors'
author = u'weylgeom contributors'

# The short X.Y version.
import weylgeom
version = weylgeom.__version__
# The full version, including alpha/beta/rc tags.
release = version

language = 'en'

exclude_patterns = ['_build']

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_static_path = []

# Output file base name for HTML help builder.
htmlhelp_basename = 'weylgeomdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (master_doc, 'weylgeom.tex', u'weylgeom Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'weylgeom', u'weylgeom Documentation', [author], 1)
]

# Example configuration for intersphinx: refer to the Python standard library.
intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'xarray': ('https://docs.xarray.dev/en/stable/', None),
}
