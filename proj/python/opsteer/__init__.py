from ._opsteer import *  # noqa: F401,F403
