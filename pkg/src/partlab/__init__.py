"""partlab: partition algebras, cumulants and free probability of random matrices."""

from .errors import (BudgetError, CapacityError, ConfigError, MalformedPartitionError,
                     MissingEntryError, PartlabError, SingularGramError, SizeMismatchError)
from .partition import (OrderReport, Partition, Stats, compare, compose, contraction, cycle,
                        distance, enumerate_family, from_cycles, from_permutation,
                        geodesic_leq, identity, in_family, is_finer, join, kernel, nc_join,
                        one, orbit_rep, product_index_set, splittings, stats, tensor,
                        to_text, transpose, transposition, zero)
from .poset import down_set, family_index, up_set
from .algebra import (NPoly, PartitionVector, gram_entry, gram_matrix, gram_solve, mul,
                      rho_matrix, synthesize)
from .tables import (CumulantTable, ExclusiveTable, MomentTable, SpectralForm, Table, single,
                     spectral_from_table)
from .transforms import (cumulants_to_exclusive, cumulants_to_moments, exclusive_transform,
                         invariance_check, moments_to_cumulants, restrict_extend)
from .freeness import FreenessReport, free_product, free_sum, freeness_check
from .exponentials import (boxtimes_evolution, degree_restriction, exp_boxplus,
                           exp_boxplus_moment, exp_boxplus_table, n_fold_sum, rescale)
from .sampling import Estimate, SampleSpec, haar_sample, law_moments
from .matrices import (MatrixFamily, block_sum, classical_bridge, entry_moment_prediction,
                       exclusive_moment, finite_cumulants, p_moment)
from .processes import (LevyTriplet, PairingTwoSpecies, approximant_classes, brauer_element,
                        gaussian_approximant, generator_spectral_form, reference_moments,
                        sample_process, two_species_pairings, unitary_bm_path, wick_tensor)
from .diagnostics import strong_invariance_diagnostic
from .experiments import ExperimentConfig, ResultRecord, run_experiment
from .acceptance import verify_suite

__version__ = "0.1.0"
