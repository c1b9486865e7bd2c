//! Constructive kernels: matching automorphisms, back-and-forth steps, EPPA
//! completion, ergodization, profinite quotients and embeddings into them,
//! and certified approximate conjugacies.

mod conjugacy;
mod embed;
mod eppa;
mod ergodize;
mod group;
mod matching;
mod partial;
mod realize;

pub use conjugacy::{approx_conjugacy_search, verify_certificate, ConjugacyCertificate};
pub use embed::{
    embed_into_profinite_tensor, embed_transitive_into_quotient, generated_perm_group,
    QuotientEmbedding, TensorEmbedding, MAX_GROUP_ORDER,
};
pub use eppa::{eppa_extend, EppaExtension};
pub use ergodize::{ergodize, Ergodized, Modification};
pub use group::{
    find_isomorphism, joint_quotient, marked_isomorphism, quotient_action, JointQuotient,
    MarkedGroup,
};
pub use matching::{extend_partial_step, match_labelings, match_partitions, Extension, Matching};
pub use partial::{Embedding, PartialIsomorphism};
pub use realize::{realize_tv_coupling, Realization};
