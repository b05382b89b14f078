//! HTTP routes.
//!
//! Mutations need `Authorization: Bearer <user id>`; the token is the
//! caller's opaque forecaster id. Every mutation body carries the version
//! the caller last saw.

use std::sync::Arc;

use argucast_core::qbaf::Violation;
use argucast_core::{
    aggregate_forecast, check_coherence, derive_forecaster_qbaf, evaluate, forecaster_is_coherent, ArgumentId,
    CoherenceVerdict, Error as CoreError, ForecastBase, ForecastSummary, ForecasterId, ForecasterQbaf, PerArgument,
    Polarity, StrengthMap, ThresholdConfig, Vote,
};
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{Debate, DebateSnapshot, DebateStore, StoreError, FORECASTING_ID};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<DebateStore>,
    /// Default ε for the at-threshold branch.
    pub epsilon: f64,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/debates", post(create_debate))
        .route("/debates/{id}", get(get_debate))
        .route("/debates/{id}/arguments", post(add_argument))
        .route("/debates/{id}/votes", put(cast_vote))
        .route("/debates/{id}/predictions", put(submit_prediction))
        .route("/debates/{id}/coherence", get(get_coherence))
        .route("/debates/{id}/forecast", get(get_forecast))
        .route("/debates/{id}/users/{uid}/qbaf", get(get_qbaf))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    Unauthorized(String),
    NotFound(String),
    Conflict { message: String, current: u64 },
    Invalid { message: String, violations: Vec<Violation> },
    Unprocessable(String),
    Internal(String),
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound { .. } => ApiError::NotFound(message),
            StoreError::Conflict { current, .. } => ApiError::Conflict { message, current },
            StoreError::Invalid(violations) => ApiError::Invalid { message, violations },
            StoreError::Unprocessable(_) => ApiError::Unprocessable(message),
            StoreError::Corrupt { .. } | StoreError::Io { .. } => ApiError::Internal(message),
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::NotFound { .. } => ApiError::NotFound(message),
            CoreError::Invalid(violations) => ApiError::Invalid { message, violations },
            CoreError::OutOfRange { .. } | CoreError::InvalidId(_) | CoreError::Domain(_) => {
                ApiError::Unprocessable(message)
            }
            _ => ApiError::Internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Unauthorized(m) => (StatusCode::UNAUTHORIZED, json!({ "error": m })),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::Conflict { message, current } => {
                (StatusCode::CONFLICT, json!({ "error": message, "version": current }))
            }
            ApiError::Invalid { message, violations } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": message, "violations": violations }),
            ),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": m })),
            ApiError::Internal(m) => {
                tracing::error!("{m}");
                (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m }))
            }
        };
        (status, Json(body)).into_response()
    }
}

/// The caller named by the bearer token.
pub struct Caller(pub ForecasterId);

impl<S: Send + Sync> FromRequestParts<S> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        let value = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(|| ApiError::Unauthorized("missing bearer token".into()))?;
        let token = value
            .strip_prefix("Bearer ")
            .ok_or_else(|| ApiError::Unauthorized("expected `Authorization: Bearer <token>`".into()))?;
        ForecasterId::new(token.trim())
            .map(Caller)
            .map_err(|e| ApiError::Unauthorized(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateDebate {
    pub question: String,
    #[serde(default)]
    pub prior: Option<f64>,
}

async fn create_debate(
    State(st): State<AppState>,
    _caller: Caller,
    Json(req): Json<CreateDebate>,
) -> Result<(StatusCode, Json<DebateSnapshot>), ApiError> {
    let debate = st.store.create(req.question, req.prior)?;
    Ok((StatusCode::CREATED, Json(debate.snapshot())))
}

async fn get_debate(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<DebateSnapshot>, ApiError> {
    Ok(Json(st.store.get(&id)?.snapshot()))
}

#[derive(Debug, Deserialize)]
pub struct AddArgument {
    pub version: u64,
    #[serde(default)]
    pub text: String,
    pub target: ArgumentId,
    pub polarity: Polarity,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArgumentCreated {
    pub id: ArgumentId,
    pub version: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VersionReply {
    pub version: u64,
}

async fn add_argument(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Caller(author): Caller,
    Json(req): Json<AddArgument>,
) -> Result<(StatusCode, Json<ArgumentCreated>), ApiError> {
    let (debate, arg) = st
        .store
        .add_argument(&id, req.version, author, req.text, req.target, req.polarity)?;
    Ok((
        StatusCode::CREATED,
        Json(ArgumentCreated {
            id: arg,
            version: debate.version,
        }),
    ))
}

#[derive(Debug, Deserialize)]
pub struct CastVote {
    pub version: u64,
    pub arg: ArgumentId,
    pub vote: Vote,
}

async fn cast_vote(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Caller(user): Caller,
    Json(req): Json<CastVote>,
) -> Result<Json<VersionReply>, ApiError> {
    let debate = st.store.cast_vote(&id, req.version, user, req.arg, req.vote)?;
    Ok(Json(VersionReply {
        version: debate.version,
    }))
}

#[derive(Debug, Deserialize)]
pub struct SubmitPrediction {
    pub version: u64,
    #[serde(default = "forecasting_arg")]
    pub arg: ArgumentId,
    pub p: f64,
}

fn forecasting_arg() -> ArgumentId {
    ArgumentId::new(FORECASTING_ID).expect("static id")
}

async fn submit_prediction(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Caller(user): Caller,
    Json(req): Json<SubmitPrediction>,
) -> Result<Json<VersionReply>, ApiError> {
    let debate = st.store.submit_prediction(&id, req.version, user, req.arg, req.p)?;
    Ok(Json(VersionReply {
        version: debate.version,
    }))
}

/// Threshold overrides. `xi2=prior` uses the debate's prior.
#[derive(Debug, Default, Deserialize)]
pub struct Overrides {
    pub xi1: Option<f64>,
    pub xi2: Option<String>,
    pub eps: Option<f64>,
}

impl Overrides {
    fn config(&self, debate: &Debate, default_eps: f64) -> Result<ThresholdConfig, ApiError> {
        let mut cfg = ThresholdConfig {
            epsilon: self.eps.unwrap_or(default_eps),
            ..ThresholdConfig::default()
        };
        if let Some(x) = self.xi1 {
            cfg.xi1 = PerArgument::constant(x);
        }
        match self.xi2.as_deref() {
            None => {}
            Some("prior") => {
                let prior = debate
                    .prior
                    .ok_or_else(|| ApiError::Unprocessable(format!("debate `{}` has no prior", debate.id)))?;
                cfg.xi2 = PerArgument::constant(prior);
            }
            Some(s) => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| ApiError::Unprocessable(format!("xi2 must be a number or `prior`, got `{s}`")))?;
                cfg.xi2 = PerArgument::constant(x);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
pub struct CoherenceQuery {
    pub user: String,
    #[serde(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoherenceReply {
    pub version: u64,
    pub user: ForecasterId,
    pub coherent: bool,
    pub verdicts: Vec<CoherenceVerdict>,
}

async fn get_coherence(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CoherenceQuery>,
) -> Result<Json<CoherenceReply>, ApiError> {
    let debate = st.store.get(&id)?;
    let user = ForecasterId::new(q.user).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    let cfg = q.overrides.config(&debate, st.epsilon)?;
    let verdicts = check_coherence(&debate.acf, &user, &cfg, &ForecastBase::default())?;
    Ok(Json(CoherenceReply {
        version: debate.version,
        coherent: forecaster_is_coherent(&verdicts)?,
        user,
        verdicts,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ForecastReply {
    pub version: u64,
    pub xi1: f64,
    pub xi2: f64,
    pub epsilon: f64,
    pub forecast: ForecastSummary,
}

async fn get_forecast(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<Overrides>,
) -> Result<Json<ForecastReply>, ApiError> {
    let debate = st.store.get(&id)?;
    let cfg = q.config(&debate, st.epsilon)?;
    let f = forecasting_arg();
    let forecast = aggregate_forecast(&debate.acf, &f, &cfg, &ForecastBase::default())?;
    Ok(Json(ForecastReply {
        version: debate.version,
        xi1: cfg.xi1.get(&f),
        xi2: cfg.xi2.get(&f),
        epsilon: cfg.epsilon,
        forecast,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QbafReply {
    pub version: u64,
    #[serde(flatten)]
    pub derived: ForecasterQbaf,
    pub strengths: StrengthMap,
}

async fn get_qbaf(
    State(st): State<AppState>,
    Path((id, uid)): Path<(String, String)>,
) -> Result<Json<QbafReply>, ApiError> {
    let debate = st.store.get(&id)?;
    let user = ForecasterId::new(uid).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    let derived = derive_forecaster_qbaf(&debate.acf, &user, &ForecastBase::default())?;
    let strengths = evaluate(&derived.qbaf)?;
    Ok(Json(QbafReply {
        version: debate.version,
        derived,
        strengths,
    }))
}
