//! Pipeline configuration: one JSON document nesting every module's
//! parameters, with validation and classifier construction.

use crate::association::AssociationConfig;
use crate::classification::{
    Classifier, GeometricClassifier, IdealOracle, NoisyOracle, NoisyOracleConfig,
};
use crate::error::{Error, Result};
use crate::fusion::FusionConfig;
use crate::lifecycle::{LifecycleConfig, Mode};
use crate::segmentation::SegmentationConfig;
use crate::tracking::NoiseConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    /// Ground-truth one-hot beliefs.
    Ideal,
    /// Confusion-matrix oracle with distance decay.
    Noisy(NoisyOracleConfig),
    /// Deterministic size-based rules, no ground truth needed.
    Geometric,
}

impl ClassifierConfig {
    pub fn build(&self) -> Result<Box<dyn Classifier>> {
        Ok(match self {
            ClassifierConfig::Ideal => Box::new(IdealOracle::new()),
            ClassifierConfig::Noisy(cfg) => Box::new(NoisyOracle::new(cfg.clone())?),
            ClassifierConfig::Geometric => Box::new(GeometricClassifier::new()),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierConfig::Noisy(cfg) => cfg.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyConfig {
    /// Relative cost of one segmentation pass.
    pub e_seg: f64,
    /// Relative cost of one classifier invocation.
    pub e_class: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            e_seg: 1.0,
            e_class: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Frame period in seconds.
    pub frame_dt: f64,
    /// Proposals (and ground truth, for scoring) beyond this range from the
    /// sensor are dropped.
    pub roi_range: f64,
    /// Take proposals straight from ground-truth boxes instead of the
    /// segmenter.
    pub ideal_detector: bool,
    /// Associate by ground-truth identity instead of the cost matrix.
    pub ideal_tracker: bool,
    /// Minimum BEV IoU for a proposal to take a ground-truth label.
    pub gt_min_iou: f64,
    pub classifier: ClassifierConfig,
    pub segmentation: SegmentationConfig,
    pub association: AssociationConfig,
    pub noise: NoiseConfig,
    pub fusion: FusionConfig,
    pub lifecycle: LifecycleConfig,
    pub energy: EnergyConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Efficient,
            frame_dt: 0.1,
            roi_range: 50.0,
            ideal_detector: false,
            ideal_tracker: false,
            gt_min_iou: 0.3,
            classifier: ClassifierConfig::Ideal,
            segmentation: SegmentationConfig::default(),
            association: AssociationConfig::default(),
            noise: NoiseConfig::default(),
            fusion: FusionConfig::default(),
            lifecycle: LifecycleConfig::default(),
            energy: EnergyConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_dt > 0.0) || !self.frame_dt.is_finite() {
            return Err(Error::Config("frame_dt must be positive and finite".into()));
        }
        if !(self.roi_range > 0.0) {
            return Err(Error::Config("roi_range must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gt_min_iou) {
            return Err(Error::Config("gt_min_iou must be in [0, 1]".into()));
        }
        if self.energy.e_seg <= 0.0 || self.energy.e_class < 0.0 {
            return Err(Error::Config("energy costs must be positive".into()));
        }
        self.classifier.validate()?;
        self.segmentation.validate()?;
        self.association.validate()?;
        self.fusion.validate()?;
        self.lifecycle.validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    /// Set a named scalar parameter; the hook used by parameter sweeps.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "roi_range" | "range" => self.roi_range = value,
            "alpha_indep" => self.fusion.alpha_indep = value,
            "start_frames" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::Config("start_frames must be a non-negative integer".into()));
                }
                self.fusion.start_frames = value as usize;
            }
            "promotion_threshold" => self.lifecycle.promotion_threshold = value,
            "max_lost_frames" => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config("max_lost_frames must be a positive integer".into()));
                }
                self.lifecycle.max_lost_frames = value as u32;
            }
            "t_da" => self.association.t_da = value,
            "cluster_distance" => self.segmentation.cluster_distance = value,
            other => {
                return Err(Error::Config(format!("unknown sweep parameter: {other}")));
            }
        }
        self.validate()
    }
}
