//! Data-parallel map helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`ExecMode::Parallel`] distributes
//! work over rayon's global pool; without it both modes run sequentially.
//! Results are always collected in index order, so output is independent of
//! the execution mode as long as each item is computed from its own inputs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn name(self) -> &'static str {
        match self {
            ExecMode::Parallel => "parallel",
            ExecMode::Sequential => "sequential",
        }
    }
}

/// True when the `parallel` feature was compiled in.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Map `f` over `0..n`, honoring `mode`.
pub fn map_indexed<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Map `f` over a slice, honoring `mode`.
pub fn map_slice<'a, T, R, F>(mode: ExecMode, items: &'a [T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Configure the rayon pool size. No effect without the `parallel` feature.
/// Returns false if the pool was already initialized.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        return rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_indexed(ExecMode::Parallel, 100, |i| i * i);
        let b = map_indexed(ExecMode::Sequential, 100, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn slice_map_preserves_order() {
        let items: Vec<u64> = (0..64).collect();
        let out = map_slice(ExecMode::Parallel, &items, |&x| x + 1);
        assert_eq!(out, (1..65).collect::<Vec<u64>>());
    }
}
