from src.simulate.sampler import SampleSet, sample_base, sample_observational, sample_regimes
