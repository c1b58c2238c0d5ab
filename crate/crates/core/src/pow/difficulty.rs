//! Retargeting of the verifier budget.

use super::{DifficultyTarget, PowError};

/// Multiplier for `sa_sweeps` when `intervals` block intervals took `span`
/// seconds against a goal of `target_interval` each, clamped to `[1/4, 4]`.
pub fn retarget_factor(target_interval: f64, intervals: u64, span: f64) -> f64 {
    if span <= 0.0 {
        return 4.0;
    }
    (target_interval * intervals as f64 / span).clamp(0.25, 4.0)
}

/// Target for the block following `recent`, the `(height, timestamp)` list of
/// its ancestors ending with the parent.
///
/// The target changes only at heights that are multiples of `window`. The
/// span is measured over the last `window` intervals (fewer at the first
/// retarget, where the chain is not yet that long). Only `sa_sweeps` moves.
pub fn adjust_difficulty(
    current: &DifficultyTarget,
    recent: &[(u64, u64)],
    target_interval: f64,
    window: u64,
) -> Result<DifficultyTarget, PowError> {
    if window < 2 {
        return Err(PowError::InvalidHistory(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if !(target_interval.is_finite() && target_interval > 0.0) {
        return Err(PowError::InvalidHistory(format!(
            "target interval must be positive, got {target_interval}"
        )));
    }
    let Some(&(parent_height, parent_ts)) = recent.last() else {
        return Err(PowError::InvalidHistory("no parent supplied".into()));
    };
    let height = parent_height + 1;
    if height % window != 0 {
        return Ok(current.clone());
    }
    let intervals = window.min(parent_height);
    if intervals == 0 {
        return Ok(current.clone());
    }
    let start_height = parent_height - intervals;
    let start_ts = recent
        .iter()
        .rev()
        .find(|(h, _)| *h == start_height)
        .map(|&(_, t)| t)
        .ok_or_else(|| {
            PowError::InvalidHistory(format!("missing timestamp for height {start_height}"))
        })?;
    let span = parent_ts as f64 - start_ts as f64;
    let factor = retarget_factor(target_interval, intervals, span);
    let sweeps = ((current.sa_sweeps as f64) * factor).round().max(1.0) as u64;
    Ok(DifficultyTarget {
        sa_sweeps: sweeps,
        ..current.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(count: u64, step: u64) -> Vec<(u64, u64)> {
        (0..count).map(|h| (h, h * step)).collect()
    }

    fn base() -> DifficultyTarget {
        DifficultyTarget {
            sa_sweeps: 100,
            ..Default::default()
        }
    }

    #[test]
    fn on_schedule_keeps_target() {
        // Parent at height 39, next height 40 retargets over heights 19..=39.
        let t = adjust_difficulty(&base(), &history(40, 10), 10.0, 20).unwrap();
        assert_eq!(t, base());
    }

    #[test]
    fn twice_too_fast_doubles() {
        let t = adjust_difficulty(&base(), &history(40, 5), 10.0, 20).unwrap();
        assert_eq!(t.sa_sweeps, 200);
        assert_eq!(
            DifficultyTarget {
                sa_sweeps: 100,
                ..t
            },
            base()
        );
    }

    #[test]
    fn clamped_both_ways() {
        assert_eq!(
            adjust_difficulty(&base(), &history(40, 1), 10.0, 20)
                .unwrap()
                .sa_sweeps,
            400
        );
        assert_eq!(
            adjust_difficulty(&base(), &history(40, 1000), 10.0, 20)
                .unwrap()
                .sa_sweeps,
            25
        );
        assert_eq!(
            adjust_difficulty(&base(), &history(40, 0), 10.0, 20)
                .unwrap()
                .sa_sweeps,
            400
        );
        let one = DifficultyTarget {
            sa_sweeps: 1,
            ..base()
        };
        assert_eq!(
            adjust_difficulty(&one, &history(40, 1000), 10.0, 20)
                .unwrap()
                .sa_sweeps,
            1
        );
    }

    #[test]
    fn only_at_window_boundaries() {
        let t = adjust_difficulty(&base(), &history(35, 1), 10.0, 20).unwrap();
        assert_eq!(t, base());
    }

    #[test]
    fn first_window_uses_available_intervals() {
        // Next height 20: 19 intervals since genesis.
        let t = adjust_difficulty(&base(), &history(20, 20), 10.0, 20).unwrap();
        assert_eq!(t.sa_sweeps, 50);
    }

    #[test]
    fn bitcoin_parameters() {
        let t = adjust_difficulty(&base(), &history(4032, 600), 600.0, 2016).unwrap();
        assert_eq!(t, base());
    }

    #[test]
    fn errors() {
        assert!(adjust_difficulty(&base(), &history(4, 1), 1.0, 1).is_err());
        assert!(adjust_difficulty(&base(), &[], 1.0, 4).is_err());
        assert!(adjust_difficulty(&base(), &[(39, 5)], 1.0, 20).is_err());
    }
}
