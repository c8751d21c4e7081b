//! On-disk formats: key and ciphertext files, and known-answer-test records.
//!
//! Every file starts with an 8-byte header:
//!
//! ```text
//! magic[4] | version | category tag (1, 3, 5) | n0 | reserved (0)
//! ```
//!
//! followed by the payload: the seed for a private key, the public-key
//! blocks for a public key, the padded syndrome for a ciphertext. Only
//! registry parameter sets can be written, since the header names the set by
//! category and `n0`.

use std::fmt::Write as _;

use sha3::{Digest, Sha3_256};

use crate::error::{Error, Result};
use crate::kem::{encapsulate, Ciphertext, SharedSecret};
use crate::keygen::{gen_keypair, PrivateKey, PublicKey};
use crate::params::{lookup, Category, ParamSet};
use crate::rng::{Drbg, Seed};

pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    PrivateKey,
    PublicKey,
    Ciphertext,
}

impl FileKind {
    pub fn magic(self) -> &'static [u8; 4] {
        match self {
            FileKind::PrivateKey => b"LDKS",
            FileKind::PublicKey => b"LDKP",
            FileKind::Ciphertext => b"LDKC",
        }
    }

    fn name(self) -> &'static str {
        match self {
            FileKind::PrivateKey => "private key",
            FileKind::PublicKey => "public key",
            FileKind::Ciphertext => "ciphertext",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FileHeader {
    pub kind: FileKind,
    pub category: Category,
    pub n0: usize,
}

impl FileHeader {
    pub fn for_params(kind: FileKind, ps: &ParamSet) -> Result<Self> {
        if !ps.standard {
            return Err(Error::format(format!("parameter set {} has no file representation", ps.id())));
        }
        Ok(Self { kind, category: ps.category, n0: ps.n0 })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let m = self.kind.magic();
        [m[0], m[1], m[2], m[3], FORMAT_VERSION, self.category.tag(), self.n0 as u8, 0]
    }

    /// Parses a header of the expected kind and resolves its parameter set.
    pub fn parse(kind: FileKind, bytes: &[u8]) -> Result<(Self, ParamSet)> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format(format!("{} file shorter than its header", kind.name())));
        }
        if &bytes[..4] != kind.magic() {
            return Err(Error::format(format!("not a {} file (bad magic)", kind.name())));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::format(format!("unsupported format version {}", bytes[4])));
        }
        let category =
            Category::from_tag(bytes[5]).ok_or_else(|| Error::format(format!("unknown category tag {}", bytes[5])))?;
        if bytes[7] != 0 {
            return Err(Error::format("reserved header byte is not zero"));
        }
        let n0 = bytes[6] as usize;
        let ps = lookup(category, n0).ok_or_else(|| Error::format(format!("no parameter set for {category} n0={n0}")))?;
        Ok((Self { kind, category, n0 }, ps))
    }
}

fn with_header(kind: FileKind, ps: &ParamSet, payload: &[u8]) -> Result<Vec<u8>> {
    let mut out = FileHeader::for_params(kind, ps)?.to_bytes().to_vec();
    out.extend_from_slice(payload);
    Ok(out)
}

fn payload(kind: FileKind, bytes: &[u8], expected: impl Fn(&ParamSet) -> usize) -> Result<(ParamSet, &[u8])> {
    let (_, ps) = FileHeader::parse(kind, bytes)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected(&ps) {
        return Err(Error::format(format!(
            "{} payload for {} must be {} bytes, got {}",
            kind.name(),
            ps.id(),
            expected(&ps),
            body.len()
        )));
    }
    Ok((ps, body))
}

/// Private key file: header and seed.
pub fn encode_private_key(sk: &PrivateKey) -> Result<Vec<u8>> {
    with_header(FileKind::PrivateKey, sk.params(), sk.seed().as_bytes())
}

pub fn decode_private_seed(bytes: &[u8]) -> Result<(ParamSet, Seed)> {
    let (ps, body) = payload(FileKind::PrivateKey, bytes, |ps| ps.seed_bytes())?;
    let seed = Seed::for_params(&ps, body)?;
    Ok((ps, seed))
}

/// Parses and expands a private key file.
pub fn decode_private_key(bytes: &[u8]) -> Result<PrivateKey> {
    let (ps, seed) = decode_private_seed(bytes)?;
    crate::keygen::expand_private(&ps, &seed)
}

pub fn encode_public_key(pk: &PublicKey) -> Result<Vec<u8>> {
    with_header(FileKind::PublicKey, pk.params(), &pk.to_bytes())
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey> {
    let (ps, body) = payload(FileKind::PublicKey, bytes, |ps| ps.public_key_bytes())?;
    PublicKey::from_bytes(&ps, body)
}

pub fn encode_ciphertext(ps: &ParamSet, ct: &Ciphertext) -> Result<Vec<u8>> {
    with_header(FileKind::Ciphertext, ps, &ct.to_bytes())
}

pub fn decode_ciphertext(bytes: &[u8]) -> Result<(ParamSet, Ciphertext)> {
    let (ps, body) = payload(FileKind::Ciphertext, bytes, |ps| ps.ciphertext_bytes())?;
    let ct = Ciphertext::from_bytes(&ps, body)?;
    Ok((ps, ct))
}

const KAT_SEED_LABEL: &[u8] = b"ledakem/kat-seed";
const KAT_COINS_LABEL: &[u8] = b"ledakem/kat-encap";

/// One known-answer record. Encapsulation coins come from the key seed, so
/// the record is reproducible from `seed` alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatRecord {
    pub count: usize,
    pub seed: Vec<u8>,
    pub pk_digest: [u8; 32],
    pub ct: Vec<u8>,
    pub ss: Vec<u8>,
}

impl KatRecord {
    pub fn compute(ps: &ParamSet, count: usize, seed: &Seed) -> Result<Self> {
        let (_, pk) = gen_keypair(ps, seed)?;
        let mut coins = Drbg::with_domain(KAT_COINS_LABEL, seed.as_bytes());
        let (ct, ss) = encapsulate(&pk, &mut coins);
        Ok(Self {
            count,
            seed: seed.as_bytes().to_vec(),
            pk_digest: Sha3_256::digest(pk.to_bytes()).into(),
            ct: ct.to_bytes(),
            ss: ss.as_bytes().to_vec(),
        })
    }
}

/// Per-record key seeds for a KAT file, derived from a master seed.
pub fn kat_seed(ps: &ParamSet, master: &[u8], count: usize) -> Seed {
    let mut material = master.to_vec();
    material.extend_from_slice(&(count as u64).to_le_bytes());
    Seed::derive(ps.category, KAT_SEED_LABEL, &material)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KatFile {
    pub params: ParamSet,
    pub records: Vec<KatRecord>,
}

impl KatFile {
    pub fn generate(ps: &ParamSet, master: &[u8], count: usize) -> Result<Self> {
        let records = (0..count).map(|i| KatRecord::compute(ps, i, &kat_seed(ps, master, i))).collect::<Result<_>>()?;
        Ok(Self { params: ps.clone(), records })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# ledakem known-answer tests\nparams = {}\n", self.params.id());
        for r in &self.records {
            let _ = write!(
                out,
                "\ncount = {}\nseed = {}\npk_sha3_256 = {}\nct = {}\nss = {}\n",
                r.count,
                hex::encode_upper(&r.seed),
                hex::encode_upper(r.pk_digest),
                hex::encode_upper(&r.ct),
                hex::encode_upper(&r.ss)
            );
        }
        out
    }

    /// Parses the text format. Structure and field lengths are checked here;
    /// the values themselves are checked by [`KatFile::verify`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut params = None;
        let mut records = Vec::new();
        let mut current: Vec<(String, String)> = Vec::new();
        let flush = |fields: &mut Vec<(String, String)>, ps: &Option<ParamSet>, out: &mut Vec<KatRecord>| -> Result<()> {
            if fields.is_empty() {
                return Ok(());
            }
            let ps = ps.as_ref().ok_or_else(|| Error::format("record before `params` line"))?;
            out.push(parse_record(ps, fields)?);
            fields.clear();
            Ok(())
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                flush(&mut current, &params, &mut records)?;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::format(format!("line {}: expected `key = value`", lineno + 1)))?;
            if key == "params" {
                if params.is_some() || !records.is_empty() || !current.is_empty() {
                    return Err(Error::format(format!("line {}: misplaced `params`", lineno + 1)));
                }
                params = Some(value.parse::<ParamSet>()?);
            } else {
                current.push((key.to_string(), value.to_string()));
            }
        }
        flush(&mut current, &params, &mut records)?;
        let params = params.ok_or_else(|| Error::format("missing `params` line"))?;
        for (i, r) in records.iter().enumerate() {
            if r.count != i {
                return Err(Error::format(format!("record {i} has count {}", r.count)));
            }
        }
        Ok(Self { params, records })
    }

    /// Recomputes every record; returns the counts that do not match.
    pub fn verify(&self) -> Result<Vec<usize>> {
        let mut bad = Vec::new();
        for r in &self.records {
            let seed = Seed::for_params(&self.params, &r.seed)?;
            if KatRecord::compute(&self.params, r.count, &seed)? != *r {
                bad.push(r.count);
            }
        }
        Ok(bad)
    }
}

fn parse_record(ps: &ParamSet, fields: &[(String, String)]) -> Result<KatRecord> {
    let get = |name: &str| -> Result<&str> {
        let mut hits = fields.iter().filter(|(k, _)| k == name);
        match (hits.next(), hits.next()) {
            (Some((_, v)), None) => Ok(v.as_str()),
            (None, _) => Err(Error::format(format!("record is missing `{name}`"))),
            (Some(_), Some(_)) => Err(Error::format(format!("record repeats `{name}`"))),
        }
    };
    if let Some((k, _)) = fields.iter().find(|(k, _)| !["count", "seed", "pk_sha3_256", "ct", "ss"].contains(&k.as_str())) {
        return Err(Error::format(format!("unknown field `{k}`")));
    }
    let hex_field = |name: &str, len: usize| -> Result<Vec<u8>> {
        let bytes = hex::decode(get(name)?).map_err(|e| Error::format(format!("`{name}`: {e}")))?;
        if bytes.len() != len {
            return Err(Error::format(format!("`{name}` must be {len} bytes, got {}", bytes.len())));
        }
        Ok(bytes)
    };
    let count = get("count")?.parse().map_err(|_| Error::format("`count` is not a number"))?;
    let digest = hex_field("pk_sha3_256", 32)?;
    Ok(KatRecord {
        count,
        seed: hex_field("seed", ps.seed_bytes())?,
        pk_digest: digest.try_into().unwrap(),
        ct: hex_field("ct", ps.ciphertext_bytes())?,
        ss: SharedSecret::from_bytes(&hex_field("ss", ps.secret_bytes())?)?.as_bytes().to_vec(),
    })
}
