/// How per-record work is scheduled.
///
/// `Parallel` maps over rayon's current pool. Without the `parallel` feature it
/// degrades to the sequential path, so callers never need to feature-gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn filter_map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Option<U> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().filter_map(f).collect()
            }
            _ => items.iter().filter_map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let input: Vec<u32> = (0..1000).collect();
        let seq = Execution::Sequential.map(&input, |x| x * 3);
        let par = Execution::Parallel.map(&input, |x| x * 3);
        assert_eq!(seq, par);
        let odd = Execution::Parallel.filter_map(&input, |x| (x % 2 == 1).then_some(*x));
        assert_eq!(odd.len(), 500);
        assert_eq!(odd[0], 1);
    }
}
