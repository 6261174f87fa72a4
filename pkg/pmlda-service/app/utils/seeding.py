import numpy as np

# Substream tags. Every random draw of a run comes from a generator keyed by
# (tag, sweep, index) under the root seed, so the draws do not depend on how
# documents are scheduled across workers.
INIT = 0
DOCUMENT = 1
TOPIC_MEAN = 2
VARIANCE = 3
GENERATE = 4
FCM = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))
