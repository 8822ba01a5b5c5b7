//! Lazily materialized deterministic streams shared between enumerators.

use std::sync::Mutex;

type Gen<T> = Box<dyn Iterator<Item = T> + Send>;

/// A fixed infinite (or finite) sequence whose prefix is computed on demand and cached.
pub struct Stream<T> {
    inner: Mutex<(Vec<T>, Option<Gen<T>>)>,
}

impl<T: Clone> Stream<T> {
    pub fn new(it: impl Iterator<Item = T> + Send + 'static) -> Self {
        Stream { inner: Mutex::new((Vec::new(), Some(Box::new(it)))) }
    }

    pub fn from_vec(v: Vec<T>) -> Self {
        Stream { inner: Mutex::new((v, None)) }
    }

    fn fill(&self, n: usize) -> std::sync::MutexGuard<'_, (Vec<T>, Option<Gen<T>>)> {
        let mut g = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        while g.0.len() < n {
            let next = match g.1.as_mut() {
                Some(it) => it.next(),
                None => None,
            };
            match next {
                Some(x) => g.0.push(x),
                None => {
                    g.1 = None;
                    break;
                }
            }
        }
        g
    }

    /// The first `n` items (fewer if the stream is finite).
    pub fn take(&self, n: usize) -> Vec<T> {
        let g = self.fill(n);
        g.0[..n.min(g.0.len())].to_vec()
    }

    pub fn get(&self, i: usize) -> Option<T> {
        self.fill(i + 1).0.get(i).cloned()
    }

    /// Runs `f` on the first `n` items without copying them.
    pub fn with_prefix<R>(&self, n: usize, f: impl FnOnce(&[T]) -> R) -> R {
        let g = self.fill(n);
        f(&g.0[..n.min(g.0.len())])
    }
}
