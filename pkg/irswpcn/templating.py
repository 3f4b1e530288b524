import io
import logging
import math
import os

import mako.exceptions
import mako.lookup
import mako.runtime
import mako.template
import numpy

logger = logging.getLogger(__name__)


def dbm_to_watts(dbm):
    return 10 ** (dbm / 10) / 1000


def db_to_linear(db):
    return 10 ** (db / 10)


def template_namespace(**extra):
    namespace = dict(
        dbm_to_watts=dbm_to_watts,
        db_to_linear=db_to_linear,
        numpy=numpy,
        math=math,
    )
    namespace.update(extra)
    return namespace


def _render(tmpl, namespace):
    buf = io.StringIO()
    ctx = mako.runtime.Context(buf, **namespace)
    try:
        tmpl.render_context(ctx)
    except:  # noqa: E722
        logger.exception(mako.exceptions.text_error_template().render())
        raise
    return buf.getvalue()


def render_file(filepath, **extra):
    """
    Render a config file through Mako. Templates may <%include> siblings,
    looked up in the file's directory.
    """
    filepath = os.path.abspath(filepath)
    lookup = mako.lookup.TemplateLookup(directories=[os.path.dirname(filepath)])
    try:
        tmpl = lookup.get_template(os.path.basename(filepath))
    except:  # noqa: E722
        logger.exception(mako.exceptions.text_error_template().render())
        raise
    return _render(tmpl, template_namespace(**extra))


def render_text(text, **extra):
    return _render(mako.template.Template(text), template_namespace(**extra))
