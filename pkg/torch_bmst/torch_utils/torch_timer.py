# Adapted from https://github.com/brouberol/contexttimer
from time import perf_counter

import torch


class Timer(object):
    """ A timer as a context manager

    Measures wall clock time with perf_counter and synchronizes CUDA when available.

    Keyword arguments:
        output -- if callable (e.g. logger.debug), called with the formatted message after exiting context.
        fmt -- str.format string to be used for output; default "took {:.3f} seconds"
        prefix -- string to prepend (plus a space) to output
    """

    def __init__(self, timer=perf_counter, output=None, fmt="took {:.3f} seconds", prefix=""):
        self.timer = timer
        self.output = output
        self.fmt = fmt
        self.prefix = prefix
        self.start = None
        self.end = None
        self.sync_cuda = torch.cuda.is_available()

    def __call__(self):
        """ Return the current time """
        if self.sync_cuda:
            torch.cuda.synchronize()
        return self.timer()

    def __enter__(self):
        self.start = self()
        self.end = None
        return self

    def __exit__(self, exc_type, exc_value, exc_traceback):
        self.end = self()
        if callable(self.output):
            self.output(" ".join([self.prefix, self.fmt.format(self.elapsed)]).strip())

    def __str__(self):
        return f'{self.elapsed:.3f}'

    @property
    def elapsed(self):
        """ Elapsed time since entering; frozen once the context is left """
        if self.end is None:
            return self() - self.start
        return self.end - self.start
