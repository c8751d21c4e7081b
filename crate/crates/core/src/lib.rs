//! LEDAkem: a Niederreiter key encapsulation mechanism over quasi-cyclic
//! low-density parity-check codes, decoded with the Q-decoder.
//!
//! ```
//! use ledakem::{decapsulate, encapsulate, gen_keypair, Drbg, ParamSet, Seed};
//!
//! let ps: ParamSet = "cat1-n2".parse().unwrap();
//! let seed = Seed::for_params(&ps, &[42; 24]).unwrap();
//! let (sk, pk) = gen_keypair(&ps, &seed).unwrap();
//! let (ct, ss) = encapsulate(&pk, &mut Drbg::new(b"coins"));
//! assert_eq!(decapsulate(&sk, &ct), ss);
//! ```

pub mod decoder;
pub mod dfr;
pub mod error;
pub mod format;
pub mod kem;
pub mod keygen;
pub mod params;
pub mod ring;
pub mod rng;
pub mod threshold;
pub mod vector;

pub use decoder::{classic_bf_decode, BfThreshold, DecodeResult, Decoded, DecodingFailure, QDecoder, Workspace};
pub use dfr::{run_trials, TrialConfig, TrialReport};
pub use error::{Error, Result};
pub use kem::{decapsulate, encapsulate, Ciphertext, SharedSecret};
pub use keygen::{expand_private, gen_keypair, PrivateKey, PublicKey};
pub use params::{lookup, registry, toy_params, Category, ParamSet};
pub use ring::{RingElement, SparseRingElement};
pub use rng::{kdf, Drbg, Seed};
pub use threshold::{CheckModel, ThresholdTable};
pub use vector::ErrorVector;
