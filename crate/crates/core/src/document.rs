//! JSON documents shared with the command-line front end.
//!
//! Every file is an envelope `{schema_version, kind, payload}`. Complex numbers
//! are `[re, im]` pairs and matrices are row-major nested arrays. Payloads are
//! re-validated on read, so a document that parses is a valid object.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgebraElement, BlockAlgebra, Label, MatrixUnit, SubalgebraEmbedding};
use crate::channels::{BroadcastCode, CqChannel, MultiwayChannel, MultiwayCode, RateRegion};
use crate::inequalities::InequalityVerdict;
use crate::linalg::{c, Mat};
use crate::observable::Povm;
use crate::operation::KrausMap;
use crate::state::DensityState;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Algebra,
    State,
    Povm,
    KrausMap,
    Channel,
    Multiway,
    Code,
    Verdicts,
    Region,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Algebra,
        Kind::State,
        Kind::Povm,
        Kind::KrausMap,
        Kind::Channel,
        Kind::Multiway,
        Kind::Code,
        Kind::Verdicts,
        Kind::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Algebra => "algebra",
            Kind::State => "state",
            Kind::Povm => "povm",
            Kind::KrausMap => "kraus_map",
            Kind::Channel => "channel",
            Kind::Multiway => "multiway",
            Kind::Code => "code",
            Kind::Verdicts => "verdicts",
            Kind::Region => "region",
        }
    }

    pub fn parse(name: &str) -> Result<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            let known: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
            Error::Document(format!(
                "unknown kind '{name}' for schema_version {SCHEMA_VERSION} (known kinds: {})",
                known.join(", ")
            ))
        })
    }
}

/// The on-disk envelope. `kind` stays a string so unknown kinds reach [`Kind::parse`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub kind: String,
    pub payload: Value,
}

impl Document {
    pub fn new(kind: Kind, payload: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.name().to_string(),
            payload,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Kind::parse(&doc.kind)?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn kind(&self) -> Result<Kind> {
        Kind::parse(&self.kind)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Document(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::Document(format!("cannot write {}: {e}", path.display())))
    }

    /// Decodes and validates the payload.
    pub fn into_object(self) -> Result<Object> {
        let kind = self.kind()?;
        let p = self.payload;
        let bad = |e: serde_json::Error| Error::Document(format!("{} payload: {e}", kind.name()));
        Ok(match kind {
            Kind::Algebra => Object::Algebra(serde_json::from_value::<AlgebraDto>(p).map_err(bad)?.decode()?),
            Kind::State => Object::State(serde_json::from_value::<StateDto>(p).map_err(bad)?.decode()?),
            Kind::Povm => Object::Povm(serde_json::from_value::<PovmDto>(p).map_err(bad)?.decode()?),
            Kind::KrausMap => Object::KrausMap(serde_json::from_value::<KrausDto>(p).map_err(bad)?.decode()?),
            Kind::Channel => Object::Channel(serde_json::from_value::<ChannelDto>(p).map_err(bad)?.decode()?),
            Kind::Multiway => Object::Multiway(serde_json::from_value::<MultiwayDto>(p).map_err(bad)?.decode()?),
            Kind::Code => Object::Code(serde_json::from_value::<CodeDto>(p).map_err(bad)?.decode()?),
            Kind::Verdicts => Object::Verdicts(serde_json::from_value(p).map_err(bad)?),
            Kind::Region => Object::Region(serde_json::from_value(p).map_err(bad)?),
        })
    }
}

/// An algebra, optionally with its embedding into a parent.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraObject {
    pub algebra: BlockAlgebra,
    pub embedding: Option<SubalgebraEmbedding>,
}

/// A state with optional named subalgebras of its algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct StateObject {
    pub state: DensityState,
    pub factors: Vec<SubalgebraEmbedding>,
}

#[derive(Clone, Debug)]
pub enum Code {
    Multiway(MultiwayCode),
    Broadcast(BroadcastCode),
}

#[derive(Clone, Debug)]
pub enum Object {
    Algebra(AlgebraObject),
    State(StateObject),
    Povm(Povm),
    KrausMap(KrausMap),
    Channel(CqChannel),
    Multiway(MultiwayChannel),
    Code(Code),
    Verdicts(Vec<InequalityVerdict>),
    Region(RateRegion),
}

impl Object {
    pub fn kind(&self) -> Kind {
        match self {
            Object::Algebra(_) => Kind::Algebra,
            Object::State(_) => Kind::State,
            Object::Povm(_) => Kind::Povm,
            Object::KrausMap(_) => Kind::KrausMap,
            Object::Channel(_) => Kind::Channel,
            Object::Multiway(_) => Kind::Multiway,
            Object::Code(_) => Kind::Code,
            Object::Verdicts(_) => Kind::Verdicts,
            Object::Region(_) => Kind::Region,
        }
    }

    pub fn to_document(&self) -> Document {
        let payload = match self {
            Object::Algebra(a) => to_value(&AlgebraDto::encode(a)),
            Object::State(s) => to_value(&StateDto::encode(s)),
            Object::Povm(x) => to_value(&PovmDto::encode(x)),
            Object::KrausMap(k) => to_value(&KrausDto::encode(k)),
            Object::Channel(w) => to_value(&ChannelDto::encode(w)),
            Object::Multiway(m) => to_value(&MultiwayDto::encode(m)),
            Object::Code(code) => to_value(&CodeDto::encode(code)),
            Object::Verdicts(v) => to_value(v),
            Object::Region(r) => to_value(r),
        };
        Document::new(self.kind(), payload)
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("payloads serialize")
}

/// Reads a document and checks its kind.
pub fn read_kind(path: &Path, kind: Kind) -> Result<Object> {
    let doc = Document::read(path)?;
    let found = doc.kind()?;
    if found != kind {
        return Err(Error::Document(format!(
            "{}: expected a {} document, found {}",
            path.display(),
            kind.name(),
            found.name()
        )));
    }
    doc.into_object()
}

pub type MatrixDto = Vec<Vec<[f64; 2]>>;

pub fn encode_matrix(m: &Mat) -> MatrixDto {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn decode_matrix(rows: &MatrixDto) -> Result<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Document("ragged matrix".into()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Document("non-finite matrix entry".into()));
    }
    Ok(Mat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn encode_element(a: &AlgebraElement) -> Vec<MatrixDto> {
    a.blocks().iter().map(encode_matrix).collect()
}

fn decode_element(alg: &BlockAlgebra, blocks: &[MatrixDto]) -> Result<AlgebraElement> {
    AlgebraElement::new(alg.clone(), blocks.iter().map(decode_matrix).collect::<Result<_>>()?)
}

fn decode_algebra(dims: &[usize]) -> Result<BlockAlgebra> {
    BlockAlgebra::new(dims.to_vec())
}

/// Image of the matrix unit `e^{(block)}_{row,col}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitImage {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub image: Vec<MatrixDto>,
}

/// A subalgebra of a parent supplied by context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubalgebraDto {
    pub domain: Vec<usize>,
    pub images: Vec<UnitImage>,
}

impl SubalgebraDto {
    pub fn encode(e: &SubalgebraEmbedding) -> Self {
        Self {
            domain: e.domain().block_dims().to_vec(),
            images: e
                .domain()
                .units()
                .into_iter()
                .map(|u| UnitImage {
                    block: u.block,
                    row: u.row,
                    col: u.col,
                    image: encode_element(e.image(u)),
                })
                .collect(),
        }
    }

    pub fn decode(&self, parent: &BlockAlgebra) -> Result<SubalgebraEmbedding> {
        let domain = decode_algebra(&self.domain)?;
        let mut images: Vec<Option<AlgebraElement>> = vec![None; domain.dim()];
        for im in &self.images {
            let u = MatrixUnit {
                block: im.block,
                row: im.row,
                col: im.col,
            };
            let d = domain.block_dims().get(u.block).copied().unwrap_or(0);
            if u.row >= d || u.col >= d {
                return Err(Error::Document(format!("no matrix unit {u:?} in {:?}", self.domain)));
            }
            let slot = &mut images[domain.unit_index(u)];
            if slot.is_some() {
                return Err(Error::Document(format!("matrix unit {u:?} given twice")));
            }
            *slot = Some(decode_element(parent, &im.image)?);
        }
        let images = images
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Document("missing matrix unit images".into()))?;
        SubalgebraEmbedding::new(domain, parent.clone(), images)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDto {
    pub parent: Vec<usize>,
    pub images: Vec<UnitImage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDto {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingDto>,
}

impl AlgebraDto {
    pub fn encode(a: &AlgebraObject) -> Self {
        Self {
            blocks: a.algebra.block_dims().to_vec(),
            embedding: a.embedding.as_ref().map(|e| EmbeddingDto {
                parent: e.parent().block_dims().to_vec(),
                images: SubalgebraDto::encode(e).images,
            }),
        }
    }

    pub fn decode(&self) -> Result<AlgebraObject> {
        let algebra = decode_algebra(&self.blocks)?;
        let embedding = match &self.embedding {
            None => None,
            Some(e) => {
                let parent = decode_algebra(&e.parent)?;
                let sub = SubalgebraDto {
                    domain: self.blocks.clone(),
                    images: e.images.clone(),
                };
                Some(sub.decode(&parent)?)
            }
        };
        Ok(AlgebraObject { algebra, embedding })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDto {
    pub algebra: Vec<usize>,
    pub blocks: Vec<MatrixDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<SubalgebraDto>,
}

impl StateDto {
    pub fn encode(s: &StateObject) -> Self {
        Self {
            algebra: s.state.algebra().block_dims().to_vec(),
            blocks: encode_element(s.state.as_element()),
            factors: s.factors.iter().map(SubalgebraDto::encode).collect(),
        }
    }

    pub fn decode(&self) -> Result<StateObject> {
        let alg = decode_algebra(&self.algebra)?;
        let state = DensityState::new(decode_element(&alg, &self.blocks)?)?;
        let factors = self.factors.iter().map(|f| f.decode(&alg)).collect::<Result<_>>()?;
        Ok(StateObject { state, factors })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmDto {
    pub algebra: Vec<usize>,
    pub outcomes: Vec<Label>,
    pub effects: Vec<Vec<MatrixDto>>,
}

impl PovmDto {
    pub fn encode(x: &Povm) -> Self {
        Self {
            algebra: x.algebra().block_dims().to_vec(),
            outcomes: x.outcomes().to_vec(),
            effects: x.effects().iter().map(encode_element).collect(),
        }
    }

    pub fn decode(&self) -> Result<Povm> {
        let alg = decode_algebra(&self.algebra)?;
        let effects = self.effects.iter().map(|e| decode_element(&alg, e)).collect::<Result<_>>()?;
        Povm::new(alg, self.outcomes.clone(), effects)
    }
}

/// `φ(A) = Σ V_m* A V_m` with each `V_m` of size `source × target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausDto {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub kraus: Vec<MatrixDto>,
    #[serde(default = "yes")]
    pub unital: bool,
}

fn yes() -> bool {
    true
}

impl KrausDto {
    pub fn encode(k: &KrausMap) -> Self {
        Self {
            source: k.source().block_dims().to_vec(),
            target: k.target().block_dims().to_vec(),
            kraus: k.kraus().iter().map(encode_matrix).collect(),
            unital: k.is_unital(),
        }
    }

    pub fn decode(&self) -> Result<KrausMap> {
        let (s, t) = (decode_algebra(&self.source)?, decode_algebra(&self.target)?);
        let kraus = self.kraus.iter().map(decode_matrix).collect::<Result<_>>()?;
        if self.unital {
            KrausMap::new(s, t, kraus)
        } else {
            KrausMap::new_subunital(s, t, kraus)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDto {
    pub inputs: Vec<Label>,
    pub output_algebra: Vec<usize>,
    pub letter_states: Vec<Vec<MatrixDto>>,
}

fn decode_states(alg: &BlockAlgebra, states: &[Vec<MatrixDto>]) -> Result<Vec<DensityState>> {
    states.iter().map(|s| DensityState::new(decode_element(alg, s)?)).collect()
}

impl ChannelDto {
    pub fn encode(w: &CqChannel) -> Self {
        Self {
            inputs: w.inputs().to_vec(),
            output_algebra: w.output().block_dims().to_vec(),
            letter_states: w.letters().iter().map(|s| encode_element(s.as_element())).collect(),
        }
    }

    pub fn decode(&self) -> Result<CqChannel> {
        let out = decode_algebra(&self.output_algebra)?;
        CqChannel::new(self.inputs.clone(), out.clone(), decode_states(&out, &self.letter_states)?)
    }
}

/// Letter states are indexed by input tuples in row-major order, sender 0 slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiwayDto {
    pub senders: Vec<Vec<Label>>,
    pub output_algebra: Vec<usize>,
    pub letter_states: Vec<Vec<MatrixDto>>,
    pub receivers: Vec<SubalgebraDto>,
}

impl MultiwayDto {
    pub fn encode(m: &MultiwayChannel) -> Self {
        Self {
            senders: m.senders().to_vec(),
            output_algebra: m.output().block_dims().to_vec(),
            letter_states: m.letters().iter().map(|s| encode_element(s.as_element())).collect(),
            receivers: m.receivers().iter().map(SubalgebraDto::encode).collect(),
        }
    }

    pub fn decode(&self) -> Result<MultiwayChannel> {
        let out = decode_algebra(&self.output_algebra)?;
        let receivers = self.receivers.iter().map(|r| r.decode(&out)).collect::<Result<_>>()?;
        MultiwayChannel::new(self.senders.clone(), out.clone(), decode_states(&out, &self.letter_states)?, receivers)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CodeDto {
    Multiway {
        block_length: usize,
        encoders: Vec<Vec<Vec<usize>>>,
        decoders: Vec<PovmDto>,
    },
    Broadcast {
        block_length: usize,
        messages: [usize; 3],
        decoded: [usize; 3],
        encoder: Vec<Vec<usize>>,
        /// Block dimensions of `𝒴^{⊗n}`.
        algebra: Vec<usize>,
        e_operators: Vec<Vec<MatrixDto>>,
        d2: PovmDto,
    },
}

impl CodeDto {
    pub fn encode(code: &Code) -> Self {
        match code {
            Code::Multiway(c) => CodeDto::Multiway {
                block_length: c.block_length,
                encoders: c.encoders.clone(),
                decoders: c.decoders.iter().map(PovmDto::encode).collect(),
            },
            Code::Broadcast(c) => CodeDto::Broadcast {
                block_length: c.block_length,
                messages: c.messages,
                decoded: c.decoded,
                encoder: c.encoder.clone(),
                algebra: c
                    .e_operators
                    .first()
                    .map(|e| e.algebra().block_dims().to_vec())
                    .unwrap_or_default(),
                e_operators: c.e_operators.iter().map(encode_element).collect(),
                d2: PovmDto::encode(&c.d2),
            },
        }
    }

    pub fn decode(&self) -> Result<Code> {
        Ok(match self {
            CodeDto::Multiway {
                block_length,
                encoders,
                decoders,
            } => Code::Multiway(MultiwayCode {
                block_length: *block_length,
                encoders: encoders.clone(),
                decoders: decoders.iter().map(PovmDto::decode).collect::<Result<_>>()?,
            }),
            CodeDto::Broadcast {
                block_length,
                messages,
                decoded,
                encoder,
                algebra,
                e_operators,
                d2,
            } => {
                let alg = decode_algebra(algebra)?;
                Code::Broadcast(BroadcastCode {
                    block_length: *block_length,
                    messages: *messages,
                    decoded: *decoded,
                    encoder: encoder.clone(),
                    e_operators: e_operators.iter().map(|e| decode_element(&alg, e)).collect::<Result<_>>()?,
                    d2: d2.decode()?,
                })
            }
        })
    }
}

/// Bits as JSON numbers, with `±∞` written as the strings `"inf"` / `"-inf"`.
pub mod bits_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::example_channel;

    #[test]
    fn rejects_unknown_kind_and_version() {
        let e = Document::from_json(r#"{"schema_version":1,"kind":"tensor","payload":{}}"#).unwrap_err();
        assert!(e.to_string().contains("schema_version 1") && e.to_string().contains("kraus_map"));
        let e = Document::from_json(r#"{"schema_version":9,"kind":"state","payload":{}}"#).unwrap_err();
        assert!(e.to_string().contains("schema_version 9"));
    }

    #[test]
    fn channel_round_trip() {
        let doc = Object::Channel(example_channel()).to_document();
        let back = Document::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        match back.into_object().unwrap() {
            Object::Channel(w) => assert_eq!(w, example_channel()),
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn invalid_state_rejected_on_read() {
        let text = r#"{"schema_version":1,"kind":"state","payload":{"algebra":[1],"blocks":[[[[2.0,0.0]]]]}}"#;
        assert!(Document::from_json(text).unwrap().into_object().is_err());
    }

    #[test]
    fn bits_serde_infinity() {
        #[derive(Serialize, Deserialize)]
        struct B(#[serde(with = "bits_serde")] f64);
        assert_eq!(serde_json::to_string(&B(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<B>("\"-inf\"").unwrap().0, f64::NEG_INFINITY);
    }
}
