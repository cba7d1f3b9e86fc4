use crate::nn::ParamVector;

use super::FederationError;

fn check_layout(params: &[&ParamVector]) -> Result<(u64, usize), FederationError> {
    let first = params.first().ok_or(FederationError::EmptyAggregation)?;
    let (digest, len) = (first.layout_digest(), first.len());
    if let Some(bad) = params
        .iter()
        .find(|p| p.layout_digest() != digest || p.len() != len)
    {
        return Err(FederationError::DigestMismatch {
            expected: digest,
            found: bad.layout_digest(),
        });
    }
    Ok((digest, len))
}

/// `Σ wᵢ·vᵢ / Σ wᵢ`, summed in `f64` in slice order and rounded to `f32`.
fn weighted_mean(params: &[&ParamVector], weights: &[f64]) -> Result<ParamVector, FederationError> {
    let (digest, len) = check_layout(params)?;
    let mut acc = vec![0.0f64; len];
    for (p, &w) in params.iter().zip(weights) {
        for (a, &v) in acc.iter_mut().zip(p.values()) {
            *a += w * f64::from(v);
        }
    }
    let total: f64 = weights.iter().sum();
    Ok(ParamVector::new(
        acc.into_iter().map(|a| (a / total) as f32).collect(),
        digest,
    ))
}

/// Unweighted mean of the client vectors of one edge. Callers pass the
/// vectors in ascending client-id order.
pub fn edge_aggregate(client_params: &[&ParamVector]) -> Result<ParamVector, FederationError> {
    let ones = vec![1.0; client_params.len()];
    weighted_mean(client_params, &ones)
}

/// Unweighted mean of the edge aggregates, ascending edge-id order.
pub fn global_aggregate(edge_params: &[&ParamVector]) -> Result<ParamVector, FederationError> {
    let ones = vec![1.0; edge_params.len()];
    weighted_mean(edge_params, &ones)
}

/// Global mean with each edge weighted by the number of clients it served.
pub fn global_aggregate_weighted(
    edge_params: &[&ParamVector],
    client_counts: &[usize],
) -> Result<ParamVector, FederationError> {
    if edge_params.len() != client_counts.len() {
        return Err(FederationError::InvalidConfig(format!(
            "{} edge vectors but {} client counts",
            edge_params.len(),
            client_counts.len()
        )));
    }
    if client_counts.iter().all(|&c| c == 0) {
        return Err(FederationError::EmptyAggregation);
    }
    let weights: Vec<f64> = client_counts.iter().map(|&c| c as f64).collect();
    weighted_mean(edge_params, &weights)
}
