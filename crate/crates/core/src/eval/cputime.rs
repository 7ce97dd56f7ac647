use std::time::Duration;

/// CPU time (user + system, all threads) consumed by this process so far.
pub fn process_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec and the clock id is a constant.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "CLOCK_PROCESS_CPUTIME_ID is unavailable");
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

/// Measures process CPU seconds spent in `f`.
pub fn cpu_timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = process_cpu_time();
    let out = f();
    (out, (process_cpu_time() - start).as_secs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busy_work_takes_cpu_time() {
        let (sum, secs) = cpu_timed(|| {
            (0..2_000_000u64)
                .map(|i| std::hint::black_box(i) ^ (i >> 3))
                .fold(0u64, u64::wrapping_add)
        });
        assert!(sum > 0);
        assert!(secs > 0.0);
        assert!(process_cpu_time() >= Duration::from_secs_f64(secs));
    }
}
