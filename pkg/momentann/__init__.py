# -*- coding: utf-8 -*-
"""Fixed-effects panel regressions on temperature moments with SLFN mean functions."""
__version__ = '0.1.0.dev0'
__version_git__ = 'unknown'
__version_full__ = '%s.%s' % (
    __version__,
    __version_git__,
)
