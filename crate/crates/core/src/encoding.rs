//! Initial object and relation features.
//!
//! `f_i = W_o [W_v v_i ; W_b b_i ; c_i]` and `f_ij = W_r [f_i ; f_j ; W_b b_ij]`
//! where boxes are normalized by image size, `c_i` is a learned class
//! embedding (or a one-hot vector) and `b_ij` is the union box.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::params::{ParamId, ParamStore};
use crate::scene::DetectedObject;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassEncoding {
    Embedding,
    OneHot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderDims {
    pub visual: usize,
    pub visual_proj: usize,
    pub box_proj: usize,
    pub class: usize,
    pub hidden: usize,
    pub num_classes: usize,
    pub class_encoding: ClassEncoding,
}

impl EncoderDims {
    /// Width of the class term: the embedding size, or `|C|` for one-hot.
    pub fn class_width(&self) -> usize {
        match self.class_encoding {
            ClassEncoding::Embedding => self.class,
            ClassEncoding::OneHot => self.num_classes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderParams {
    pub w_o: ParamId,
    pub w_v: ParamId,
    pub w_b: ParamId,
    pub w_r: ParamId,
    /// `|C| x D_c`; absent with one-hot class encoding.
    pub class_embedding: Option<ParamId>,
    pub dims: EncoderDims,
}

impl EncoderParams {
    pub fn register(store: &mut ParamStore, dims: EncoderDims) -> Self {
        let w_v = store.add("encoder.w_v", dims.visual_proj, dims.visual);
        let w_b = store.add("encoder.w_b", dims.box_proj, 4);
        let class_embedding = match dims.class_encoding {
            ClassEncoding::Embedding => Some(store.add("encoder.class_embedding", dims.num_classes, dims.class)),
            ClassEncoding::OneHot => None,
        };
        let w_o = store.add(
            "encoder.w_o",
            dims.hidden,
            dims.visual_proj + dims.box_proj + dims.class_width(),
        );
        let w_r = store.add("encoder.w_r", dims.hidden, 2 * dims.hidden + dims.box_proj);
        EncoderParams { w_o, w_v, w_b, w_r, class_embedding, dims }
    }

    pub fn ids(&self) -> Vec<ParamId> {
        let mut ids = vec![self.w_o, self.w_v, self.w_b, self.w_r];
        ids.extend(self.class_embedding);
        ids
    }

    fn class_term(&self, tape: &mut Tape, store: &ParamStore, label: usize) -> Var {
        match self.class_embedding {
            Some(id) => {
                let table = tape.param(store, id);
                tape.row(table, label)
            }
            None => {
                let mut onehot = vec![0.0; self.dims.num_classes];
                onehot[label] = 1.0;
                tape.input(onehot)
            }
        }
    }

    pub fn encode_object(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        obj: &DetectedObject,
        image: (f64, f64),
    ) -> Result<Var> {
        if obj.visual_feature.len() != self.dims.visual {
            return Err(Error::Config(format!(
                "visual feature has dimension {}, encoder expects {}",
                obj.visual_feature.len(),
                self.dims.visual
            )));
        }
        if obj.label >= self.dims.num_classes {
            return Err(Error::Config(format!("class {} outside encoder vocabulary", obj.label)));
        }
        let v = tape.input(obj.visual_feature.clone());
        let w_v = tape.param(store, self.w_v);
        let pv = tape.matvec(w_v, v);
        let pb = self.encode_box(tape, store, &obj.bbox, image);
        let c = self.class_term(tape, store, obj.label);
        let cat = tape.concat(&[pv, pb, c]);
        let w_o = tape.param(store, self.w_o);
        Ok(tape.matvec(w_o, cat))
    }

    pub fn encode_box(&self, tape: &mut Tape, store: &ParamStore, b: &BBox, image: (f64, f64)) -> Var {
        let nb = tape.input(b.normalized(image.0, image.1).to_vec());
        let w_b = tape.param(store, self.w_b);
        tape.matvec(w_b, nb)
    }

    pub fn encode_relation(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        f_subject: Var,
        f_object: Var,
        union: &BBox,
        image: (f64, f64),
    ) -> Result<Var> {
        if tape.dim(f_subject) != self.dims.hidden || tape.dim(f_object) != self.dims.hidden {
            return Err(Error::Config("object feature dimension mismatch".into()));
        }
        let pb = self.encode_box(tape, store, union, image);
        let cat = tape.concat(&[f_subject, f_object, pb]);
        let w_r = tape.param(store, self.w_r);
        Ok(tape.matvec(w_r, cat))
    }
}

/// Class embedding rows as plain vectors (label vectors for similarity-based pair selection).
pub fn label_embeddings(store: &ParamStore, enc: &EncoderParams) -> Vec<Vec<f64>> {
    match enc.class_embedding {
        Some(id) => {
            let p = store.get(id);
            (0..p.rows).map(|r| p.row(r).to_vec()).collect()
        }
        None => (0..enc.dims.num_classes)
            .map(|c| (0..enc.dims.num_classes).map(|k| if k == c { 1.0 } else { 0.0 }).collect())
            .collect(),
    }
}

/// Plain-value object encoding.
pub fn encode_object(
    store: &ParamStore,
    enc: &EncoderParams,
    obj: &DetectedObject,
    image: (f64, f64),
) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let v = enc.encode_object(&mut tape, store, obj, image)?;
    Ok(tape.value(v).to_vec())
}

/// Plain-value relation encoding.
pub fn encode_relation(
    store: &ParamStore,
    enc: &EncoderParams,
    f_subject: &[f64],
    f_object: &[f64],
    union: &BBox,
    image: (f64, f64),
) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let s = tape.input(f_subject.to_vec());
    let o = tape.input(f_object.to_vec());
    let v = enc.encode_relation(&mut tape, store, s, o, union, image)?;
    Ok(tape.value(v).to_vec())
}
