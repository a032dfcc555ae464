# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

import datetime
import importlib.metadata


# -- General configuration ---------------------------------------------------

extensions = ["sphinx.ext.mathjax"]

master_doc = "index"

project = "crp-engine"
copyright = "%s, The crp-engine Authors" % datetime.date.today().year

version = importlib.metadata.version("crp-engine")

pygments_style = "sphinx"


# -- Options for HTML output -------------------------------------------------

html_show_sourcelink = False
html_show_sphinx = False
html_theme = "basic"
