//! The attack engine: classic gradient attacks (FGSM, FGM, I-FGSM) and the
//! negative-direction far-field attacks (NI-FGSM, NI-FGM, NMI-FGSM, NMI-FGM),
//! unified under one configurable iteration loop.
//!
//! Classic methods *maximize* the loss under a small budget `epsilon` so the
//! model misclassifies. The negative methods *minimize* the loss while the
//! iterate drifts far from the original image, producing inputs at distance
//! `delta` or more that the attacked model still assigns to the original
//! class. Distances for the negative methods are reported and checked in L2
//! pixel units, even for sign-based steps whose per-step geometry is L-inf.
//!
//! Attack runs are pure functions of `(model, example, config)`: no hidden
//! state, no randomness, bit-identical results on reruns.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::net::{Differentiable, LabeledExample};
use crate::tensor::{NormOrder, Tensor};
use crate::Result;

/// The seven supported attack methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackMethod {
    Fgsm,
    Fgm,
    IFgsm,
    NiFgsm,
    NiFgm,
    NmiFgsm,
    NmiFgm,
}

impl AttackMethod {
    /// All methods, in presentation order.
    pub const ALL: [AttackMethod; 7] = [
        AttackMethod::Fgsm,
        AttackMethod::Fgm,
        AttackMethod::IFgsm,
        AttackMethod::NiFgsm,
        AttackMethod::NiFgm,
        AttackMethod::NmiFgsm,
        AttackMethod::NmiFgm,
    ];

    /// The four far-field methods, in presentation order.
    pub const NEW_TYPE: [AttackMethod; 4] = [
        AttackMethod::NiFgsm,
        AttackMethod::NiFgm,
        AttackMethod::NmiFgsm,
        AttackMethod::NmiFgm,
    ];

    /// Norm of the step geometry (and of the classic budget).
    pub fn norm(&self) -> NormOrder {
        match self {
            AttackMethod::Fgsm
            | AttackMethod::IFgsm
            | AttackMethod::NiFgsm
            | AttackMethod::NmiFgsm => NormOrder::Linf,
            AttackMethod::Fgm | AttackMethod::NiFgm | AttackMethod::NmiFgm => NormOrder::L2,
        }
    }

    /// True for the loss-minimizing far-field methods.
    pub fn is_new_type(&self) -> bool {
        matches!(
            self,
            AttackMethod::NiFgsm | AttackMethod::NiFgm | AttackMethod::NmiFgsm | AttackMethod::NmiFgm
        )
    }

    /// True for the momentum variants.
    pub fn uses_momentum(&self) -> bool {
        matches!(self, AttackMethod::NmiFgsm | AttackMethod::NmiFgm)
    }

    /// True for single-step methods.
    pub fn is_single_step(&self) -> bool {
        matches!(self, AttackMethod::Fgsm | AttackMethod::Fgm)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackMethod::Fgsm => "fgsm",
            AttackMethod::Fgm => "fgm",
            AttackMethod::IFgsm => "i-fgsm",
            AttackMethod::NiFgsm => "ni-fgsm",
            AttackMethod::NiFgm => "ni-fgm",
            AttackMethod::NmiFgsm => "nmi-fgsm",
            AttackMethod::NmiFgm => "nmi-fgm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "fgsm" => Ok(AttackMethod::Fgsm),
            "fgm" => Ok(AttackMethod::Fgm),
            "i-fgsm" | "ifgsm" => Ok(AttackMethod::IFgsm),
            "ni-fgsm" | "nifgsm" => Ok(AttackMethod::NiFgsm),
            "ni-fgm" | "nifgm" => Ok(AttackMethod::NiFgm),
            "nmi-fgsm" | "nmifgsm" => Ok(AttackMethod::NmiFgsm),
            "nmi-fgm" | "nmifgm" => Ok(AttackMethod::NmiFgm),
            other => Err(Error::invalid(format!("unknown attack method {other:?}"))),
        }
    }
}

impl std::fmt::Display for AttackMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// When an iterative run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Run exactly `max_iterations` steps.
    FixedIterations,
    /// Stop as soon as the L2 distance from the original reaches `delta`
    /// (or `max_iterations` is exhausted).
    DistanceReached,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// All configured iterations ran.
    IterationsExhausted,
    /// The distance threshold was reached first.
    DistanceReached,
    /// A zero gradient (or zero momentum) left no direction to step in;
    /// for loss minimization this is a stationary point.
    ZeroGradient,
    /// The zero-step diagnostic guard returned the original unchanged.
    ZeroStepGuard,
}

/// Full configuration of one attack run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    pub method: AttackMethod,
    /// Classic-attack budget (distance ceiling).
    pub epsilon: f64,
    /// Far-field distance floor, in L2 pixel units.
    pub delta: f64,
    /// Step size. `None` derives `delta / max_iterations` for the far-field
    /// methods and `epsilon / max_iterations` for I-FGSM.
    pub alpha: Option<f64>,
    pub max_iterations: usize,
    /// Momentum decay factor; consulted only by the NMI-* methods.
    pub decay: f64,
    pub termination: Termination,
    /// Valid pixel range; every step is clamped into it.
    pub clamp_range: (f64, f64),
    /// Targeted variant: classic methods minimize the loss toward this
    /// class; far-field methods accept only the example's own label here.
    pub target: Option<usize>,
    /// Diagnostic mode: perform zero steps and return the original.
    pub zero_step_guard: bool,
    /// Record a per-iteration (loss, distance) trace in the result.
    pub record_trace: bool,
}

impl AttackConfig {
    /// A fresh config with desk-scale defaults for the given method.
    pub fn new(method: AttackMethod) -> Self {
        AttackConfig {
            method,
            epsilon: 32.0,
            delta: 650.0,
            alpha: None,
            max_iterations: 250,
            decay: 0.8,
            termination: Termination::FixedIterations,
            clamp_range: (0.0, 255.0),
            target: None,
            zero_step_guard: false,
            record_trace: false,
        }
    }

    /// The desk-scale reference configuration used by the evaluation
    /// harness: delta 650, 250 iterations, decay 0.8, alpha = delta / N.
    pub fn reference(method: AttackMethod) -> Self {
        Self::new(method)
    }

    /// Step size actually used by iterative methods.
    pub fn resolved_alpha(&self) -> f64 {
        match self.alpha {
            Some(a) => a,
            None => {
                let base = if self.method.is_new_type() { self.delta } else { self.epsilon };
                base / self.max_iterations as f64
            }
        }
    }

    /// Norm of the step geometry, kept for reporting.
    pub fn norm(&self) -> NormOrder {
        self.method.norm()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::invalid(format!("delta must be >= 0, got {}", self.delta)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::invalid(format!("decay must be a finite value >= 0, got {}", self.decay)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) {
                return Err(Error::invalid(format!("alpha must be > 0, got {a}")));
            }
        } else if !self.method.is_single_step() && !(self.resolved_alpha() > 0.0) {
            return Err(Error::invalid(
                "derived step size is zero; set alpha explicitly or use a positive budget",
            ));
        }
        if self.termination == Termination::DistanceReached {
            if !self.method.is_new_type() {
                return Err(Error::invalid(
                    "DistanceReached termination applies to the far-field methods only",
                ));
            }
            if !(self.delta > 0.0) {
                return Err(Error::invalid("DistanceReached termination requires delta > 0"));
            }
        }
        if self.clamp_range.0 > self.clamp_range.1 {
            return Err(Error::invalid(format!(
                "clamp range inverted: {} > {}",
                self.clamp_range.0, self.clamp_range.1
            )));
        }
        Ok(())
    }
}

/// Accumulated, L1-normalized gradient history.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub g: Tensor,
}

impl MomentumState {
    /// The required all-zeros start.
    pub fn zeros(shape: Vec<usize>) -> Self {
        MomentumState { g: Tensor::zeros(shape) }
    }
}

/// One momentum update: `g <- mu * g + grad / |grad|_1`. A zero gradient
/// contributes a zero term rather than an error.
pub fn update_momentum(state: &MomentumState, grad: &Tensor, mu: f64) -> Result<MomentumState> {
    if state.g.shape() != grad.shape() {
        return Err(Error::ShapeMismatch {
            expected: state.g.shape().to_vec(),
            actual: grad.shape().to_vec(),
        });
    }
    let l1 = grad.norm(NormOrder::L1);
    let normalized = if l1 == 0.0 { Tensor::zeros(grad.shape().to_vec()) } else { grad.scale(1.0 / l1) };
    let g = state.g.scale(mu).add(&normalized).expect("same shape");
    Ok(MomentumState { g })
}

/// One recorded iteration: loss and distance-from-original after the step.
/// The distance is in the method's reporting norm (L-inf for the classic
/// sign methods, L2 otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub loss: f64,
    pub distance: f64,
}

/// Outcome of one attack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub adversarial: Tensor,
    pub iterations_used: usize,
    /// Recomputed from `adversarial - original`, never accumulated.
    pub distance_linf: f64,
    pub distance_l2: f64,
    pub original_prediction: usize,
    pub adversarial_prediction: usize,
    pub loss_initial: f64,
    pub loss_final: f64,
    pub stop_reason: StopReason,
    pub trace: Option<Vec<TracePoint>>,
}

impl AttackResult {
    /// True when the run stopped for lack of a gradient direction.
    pub fn zero_gradient(&self) -> bool {
        self.stop_reason == StopReason::ZeroGradient
    }
}

/// Dispatch entry point over all seven methods.
pub fn run_attack<M: Differentiable>(
    model: &M,
    example: &LabeledExample,
    config: &AttackConfig,
) -> Result<AttackResult> {
    match config.method {
        AttackMethod::Fgsm => fgsm(model, example, config),
        AttackMethod::Fgm => fgm(model, example, config),
        AttackMethod::IFgsm => i_fgsm(model, example, config),
        AttackMethod::NiFgsm => ni_fgsm(model, example, config),
        AttackMethod::NiFgm => ni_fgm(model, example, config),
        AttackMethod::NmiFgsm => nmi_fgsm(model, example, config),
        AttackMethod::NmiFgm => nmi_fgm(model, example, config),
    }
}

/// Single sign step of size epsilon in the loss-increasing direction.
pub fn fgsm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::Fgsm)?;
    Engine::prepare(model, example, config)?.run()
}

/// Single L2-normalized gradient step of length epsilon.
pub fn fgm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::Fgm)?;
    Engine::prepare(model, example, config)?.run()
}

/// Iterated sign steps, clipped into the epsilon ball each iteration.
pub fn i_fgsm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::IFgsm)?;
    Engine::prepare(model, example, config)?.run()
}

/// Far-field attack: iterated sign steps along the negative gradient.
pub fn ni_fgsm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::NiFgsm)?;
    Engine::prepare(model, example, config)?.run()
}

/// Far-field attack: iterated L2-normalized steps along the negative gradient.
pub fn ni_fgm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::NiFgm)?;
    Engine::prepare(model, example, config)?.run()
}

/// NI-FGSM with momentum accumulation of L1-normalized gradients.
pub fn nmi_fgsm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::NmiFgsm)?;
    Engine::prepare(model, example, config)?.run()
}

/// NI-FGM with momentum accumulation of L1-normalized gradients.
pub fn nmi_fgm<M: Differentiable>(model: &M, example: &LabeledExample, config: &AttackConfig) -> Result<AttackResult> {
    expect_method(config, AttackMethod::NmiFgm)?;
    Engine::prepare(model, example, config)?.run()
}

fn expect_method(config: &AttackConfig, method: AttackMethod) -> Result<()> {
    if config.method != method {
        return Err(Error::invalid(format!(
            "config selects {} but {} was invoked",
            config.method, method
        )));
    }
    Ok(())
}

/// Shared iteration machinery for all methods.
struct Engine<'a, M: Differentiable> {
    model: &'a M,
    config: &'a AttackConfig,
    original: &'a Tensor,
    /// Label the loss is computed against.
    loss_label: usize,
    /// +1 to ascend the loss (classic untargeted), -1 to descend.
    direction: f64,
    original_prediction: usize,
    loss_initial: f64,
}

impl<'a, M: Differentiable> Engine<'a, M> {
    fn prepare(model: &'a M, example: &'a LabeledExample, config: &'a AttackConfig) -> Result<Self> {
        config.validate()?;
        if example.image.shape() != model.input_shape() {
            return Err(Error::ShapeMismatch {
                expected: model.input_shape().to_vec(),
                actual: example.image.shape().to_vec(),
            });
        }
        if example.label >= model.class_count() {
            return Err(Error::invalid(format!(
                "label {} out of range for {} classes",
                example.label,
                model.class_count()
            )));
        }

        let (loss_label, direction) = match config.target {
            None => (example.label, if config.method.is_new_type() { -1.0 } else { 1.0 }),
            Some(t) => {
                if t >= model.class_count() {
                    return Err(Error::invalid(format!(
                        "target class {t} out of range for {} classes",
                        model.class_count()
                    )));
                }
                if config.method.is_new_type() {
                    // The far-field methods already steer toward the true
                    // class; any other target is a configuration error.
                    if t != example.label {
                        return Err(Error::invalid(format!(
                            "far-field methods are tied to the example's own class; \
                             target {t} differs from label {}",
                            example.label
                        )));
                    }
                    (example.label, -1.0)
                } else {
                    // Targeted classic attack: descend the loss toward `t`.
                    (t, -1.0)
                }
            }
        };

        let original_prediction = model.predict(&example.image)?;
        let loss_initial = model.loss(&example.image, loss_label)?;
        Ok(Engine {
            model,
            config,
            original: &example.image,
            loss_label,
            direction,
            original_prediction,
            loss_initial,
        })
    }

    fn run(self) -> Result<AttackResult> {
        let cfg = self.config;
        let (lo, hi) = cfg.clamp_range;

        if cfg.zero_step_guard {
            let adversarial = self.original.clamp(lo, hi)?;
            return self.finish(adversarial, 0, StopReason::ZeroStepGuard, None);
        }

        let mut trace = if cfg.record_trace { Some(Vec::new()) } else { None };
        let alpha = cfg.resolved_alpha();

        match cfg.method {
            AttackMethod::Fgsm => {
                let grad = self.model.input_gradient(self.original, self.loss_label)?;
                let step = grad.sign().scale(self.direction * cfg.epsilon);
                let adversarial = self.original.add(&step).expect("same shape").clamp(lo, hi)?;
                self.trace_point(&mut trace, 1, &adversarial)?;
                self.finish(adversarial, 1, StopReason::IterationsExhausted, trace)
            }
            AttackMethod::Fgm => {
                let grad = self.model.input_gradient(self.original, self.loss_label)?;
                let n2 = grad.norm(NormOrder::L2);
                if n2 == 0.0 {
                    let adversarial = self.original.clamp(lo, hi)?;
                    return self.finish(adversarial, 0, StopReason::ZeroGradient, trace);
                }
                let step = grad.scale(self.direction * cfg.epsilon / n2);
                let adversarial = self.original.add(&step).expect("same shape").clamp(lo, hi)?;
                self.trace_point(&mut trace, 1, &adversarial)?;
                self.finish(adversarial, 1, StopReason::IterationsExhausted, trace)
            }
            AttackMethod::IFgsm => {
                let mut x = self.original.clone();
                let mut used = 0;
                let mut reason = StopReason::IterationsExhausted;
                for n in 0..cfg.max_iterations {
                    let grad = self.model.input_gradient(&x, self.loss_label)?;
                    let s = grad.sign();
                    if s.norm(NormOrder::Linf) == 0.0 {
                        reason = StopReason::ZeroGradient;
                        break;
                    }
                    x = x
                        .add(&s.scale(self.direction * alpha))
                        .expect("same shape")
                        .clip_to_ball(self.original, cfg.epsilon)?
                        .clamp(lo, hi)?;
                    used = n + 1;
                    self.trace_point(&mut trace, used, &x)?;
                }
                self.finish(x, used, reason, trace)
            }
            AttackMethod::NiFgsm | AttackMethod::NiFgm | AttackMethod::NmiFgsm | AttackMethod::NmiFgm => {
                // Momentum decay: plain NI-* methods are the mu = 0 instance
                // of the same loop, which makes the degeneracy exact.
                let mu = if cfg.method.uses_momentum() { cfg.decay } else { 0.0 };
                let sign_step = cfg.method.norm() == NormOrder::Linf;
                let mut momentum = MomentumState::zeros(self.original.shape().to_vec());
                let mut x = self.original.clone();
                let mut used = 0;
                let mut reason = StopReason::IterationsExhausted;
                for n in 0..cfg.max_iterations {
                    let grad = self.model.input_gradient(&x, self.loss_label)?;
                    momentum = update_momentum(&momentum, &grad, mu)?;
                    if sign_step {
                        let s = momentum.g.sign();
                        if s.norm(NormOrder::Linf) == 0.0 {
                            reason = StopReason::ZeroGradient;
                            break;
                        }
                        x = x.add(&s.scale(-alpha)).expect("same shape").clamp(lo, hi)?;
                    } else {
                        let n2 = momentum.g.norm(NormOrder::L2);
                        if n2 == 0.0 {
                            reason = StopReason::ZeroGradient;
                            break;
                        }
                        x = x
                            .add(&momentum.g.scale(-alpha / n2))
                            .expect("same shape")
                            .clamp(lo, hi)?;
                    }
                    used = n + 1;
                    self.trace_point(&mut trace, used, &x)?;
                    if cfg.termination == Termination::DistanceReached {
                        let dist = x.sub(self.original).expect("same shape").norm(NormOrder::L2);
                        if dist >= cfg.delta {
                            reason = StopReason::DistanceReached;
                            break;
                        }
                    }
                }
                self.finish(x, used, reason, trace)
            }
        }
    }

    fn trace_point(
        &self,
        trace: &mut Option<Vec<TracePoint>>,
        iteration: usize,
        x: &Tensor,
    ) -> Result<()> {
        if let Some(points) = trace.as_mut() {
            let diff = x.sub(self.original).expect("same shape");
            let distance = if self.config.method.is_new_type() {
                diff.norm(NormOrder::L2)
            } else {
                diff.norm(self.config.method.norm())
            };
            points.push(TracePoint {
                iteration,
                loss: self.model.loss(x, self.loss_label)?,
                distance,
            });
        }
        Ok(())
    }

    fn finish(
        self,
        adversarial: Tensor,
        iterations_used: usize,
        stop_reason: StopReason,
        trace: Option<Vec<TracePoint>>,
    ) -> Result<AttackResult> {
        let diff = adversarial.sub(self.original).expect("same shape");
        let adversarial_prediction = self.model.predict(&adversarial)?;
        let loss_final = self.model.loss(&adversarial, self.loss_label)?;
        Ok(AttackResult {
            distance_linf: diff.norm(NormOrder::Linf),
            distance_l2: diff.norm(NormOrder::L2),
            adversarial,
            iterations_used,
            original_prediction: self.original_prediction,
            adversarial_prediction,
            loss_initial: self.loss_initial,
            loss_final,
            stop_reason,
            trace,
        })
    }
}
