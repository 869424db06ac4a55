import hypothesis

# Numeric solves can blow past the default 200ms deadline on slow boxes;
# correctness, not latency, is what these tests check.
hypothesis.settings.register_profile("windlssvm", deadline=None, max_examples=50)
hypothesis.settings.load_profile("windlssvm")
