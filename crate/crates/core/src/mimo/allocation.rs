use crate::error::{Error, Result};

/// `floor(RM / (R^2 + 2R - 1))`, the number of aligned vectors per receiver.
pub fn theorem4_block_width(r: usize, m: usize) -> usize {
    r * m / (r * r + 2 * r - 1)
}

/// Raises entries of `base` one at a time, last user first and cycling,
/// until they sum to `target`, never exceeding `cap`.
pub fn distribute_surplus(mut base: Vec<usize>, target: usize, cap: usize) -> Result<Vec<usize>> {
    let sum: usize = base.iter().sum();
    if sum > target || base.iter().any(|&d| d > cap) || base.len() * cap < target {
        return Err(Error::InvalidConfig(format!(
            "cannot reach {target} streams from {base:?} with per-user cap {cap}"
        )));
    }
    let mut surplus = target - sum;
    while surplus > 0 {
        for d in base.iter_mut().rev() {
            if surplus == 0 {
                break;
            }
            if *d < cap {
                *d += 1;
                surplus -= 1;
            }
        }
    }
    Ok(base)
}

/// Per-user streams for the eigenvector scheme on `R+2` users.
pub fn allocate_dof_theorem4(r: usize, m: usize) -> Result<Vec<usize>> {
    if r < 2 || m < r + 2 {
        return Err(Error::NotApplicable(format!(
            "eigenvector scheme needs R >= 2 and M >= R + 2 (got R={r}, M={m})"
        )));
    }
    let f = theorem4_block_width(r, m);
    let alloc = distribute_surplus(vec![r * f; r + 2], r * m + f, m)?;
    debug_assert!(alloc.iter().all(|&d| (r * f..=m).contains(&d)));
    Ok(alloc)
}

/// `ceil((R+2)/M)`.
pub fn theorem5_extension(r: usize, m: usize) -> usize {
    (r + 2).div_ceil(m)
}

/// Per-user streams for the extension scheme: user 2 (index 1) starts at
/// `R+1`, the others at `R`, padded to `RME+1` under the cap `ME`.
pub fn allocate_dof_theorem5(r: usize, m: usize) -> Result<Vec<usize>> {
    if r < 2 || m < 2 || m >= r + 2 {
        return Err(Error::NotApplicable(format!(
            "extension scheme needs R >= 2 and 1 < M < R + 2 (got R={r}, M={m})"
        )));
    }
    let e = theorem5_extension(r, m);
    let mut base = vec![r; r + 2];
    base[1] = r + 1;
    distribute_surplus(base, r * m * e + 1, m * e)
}
