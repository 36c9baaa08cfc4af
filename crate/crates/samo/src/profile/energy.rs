//! Energy backends: RAPL microjoule counters read from the powercap
//! sysfs hierarchy, or a watts × wall-time proxy for machines (and CI
//! sandboxes) without readable counters.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ProfileError;

/// Where an energy figure came from. Mixing sources within one analysis
/// is rejected; proxy numbers are for pipeline testing only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySource {
    Rapl,
    Proxy,
}

impl EnergySource {
    pub fn label(self) -> &'static str {
        match self {
            EnergySource::Rapl => "rapl",
            EnergySource::Proxy => "proxy",
        }
    }
}

/// Joules attributed to one scope or aggregate. `dram_joules` is `None`
/// on hardware that exposes no DRAM domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReading {
    pub cpu_joules: f64,
    pub dram_joules: Option<f64>,
    pub source: EnergySource,
}

impl EnergyReading {
    pub(crate) fn zero(source: EnergySource, with_dram: bool) -> Self {
        Self {
            cpu_joules: 0.0,
            dram_joules: if with_dram { Some(0.0) } else { None },
            source,
        }
    }

    pub(crate) fn accumulate(&mut self, other: &EnergyReading) {
        self.cpu_joules += other.cpu_joules;
        self.dram_joules = match (self.dram_joules, other.dram_joules) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }

    /// CPU + DRAM (when present).
    pub fn total_joules(&self) -> f64 {
        self.cpu_joules + self.dram_joules.unwrap_or(0.0)
    }
}

/// One powercap zone: its `energy_uj` counter and wraparound range.
#[derive(Debug, Clone)]
struct RaplDomain {
    energy_path: PathBuf,
    max_range_uj: u64,
}

impl RaplDomain {
    fn read_uj(&self) -> Result<u64, ProfileError> {
        let text = fs::read_to_string(&self.energy_path)?;
        text.trim()
            .parse::<u64>()
            .map_err(|e| ProfileError::RaplUnavailable(format!("bad counter value: {e}")))
    }
}

/// RAPL counter reader over all detected package and DRAM zones.
#[derive(Debug, Clone)]
pub struct RaplReader {
    packages: Vec<RaplDomain>,
    dram: Vec<RaplDomain>,
}

/// Counter difference with single-wraparound correction.
pub fn wrap_corrected_delta(before: u64, after: u64, max_range: u64) -> u64 {
    if after >= before {
        after - before
    } else {
        max_range - before + after
    }
}

impl RaplReader {
    /// Scans `/sys/class/powercap` for `intel-rapl:N` package zones and
    /// their `intel-rapl:N:M` DRAM subzones.
    pub fn discover() -> Result<Self, ProfileError> {
        Self::discover_at(Path::new("/sys/class/powercap"))
    }

    pub fn discover_at(root: &Path) -> Result<Self, ProfileError> {
        let mut packages = Vec::new();
        let mut dram = Vec::new();
        let entries = fs::read_dir(root)
            .map_err(|e| ProfileError::RaplUnavailable(format!("{}: {e}", root.display())))?;
        let mut zones: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        zones.sort();
        for zone in zones {
            let Some(stem) = zone.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            if !stem.starts_with("intel-rapl:") {
                continue;
            }
            let name = fs::read_to_string(zone.join("name")).unwrap_or_default();
            let name = name.trim();
            let is_package = stem.matches(':').count() == 1 && name.starts_with("package");
            let is_dram = stem.matches(':').count() == 2 && name == "dram";
            if !is_package && !is_dram {
                continue;
            }
            let max_range_uj = fs::read_to_string(zone.join("max_energy_range_uj"))
                .ok()
                .and_then(|s| s.trim().parse().ok())
                .unwrap_or(u64::MAX);
            let domain = RaplDomain {
                energy_path: zone.join("energy_uj"),
                max_range_uj,
            };
            // A domain we cannot read is as good as absent.
            domain.read_uj()?;
            if is_package {
                packages.push(domain);
            } else {
                dram.push(domain);
            }
        }
        if packages.is_empty() {
            return Err(ProfileError::RaplUnavailable(
                "no readable package domains".into(),
            ));
        }
        Ok(Self { packages, dram })
    }

    pub fn has_dram(&self) -> bool {
        !self.dram.is_empty()
    }

    fn read(&self) -> Result<RaplSnapshot, ProfileError> {
        Ok(RaplSnapshot {
            packages_uj: self
                .packages
                .iter()
                .map(|d| d.read_uj())
                .collect::<Result<_, _>>()?,
            dram_uj: self
                .dram
                .iter()
                .map(|d| d.read_uj())
                .collect::<Result<_, _>>()?,
        })
    }

    fn delta(&self, before: &RaplSnapshot, after: &RaplSnapshot) -> EnergyReading {
        let cpu_uj: u64 = self
            .packages
            .iter()
            .zip(before.packages_uj.iter().zip(&after.packages_uj))
            .map(|(d, (&b, &a))| wrap_corrected_delta(b, a, d.max_range_uj))
            .sum();
        let dram_uj: u64 = self
            .dram
            .iter()
            .zip(before.dram_uj.iter().zip(&after.dram_uj))
            .map(|(d, (&b, &a))| wrap_corrected_delta(b, a, d.max_range_uj))
            .sum();
        EnergyReading {
            cpu_joules: cpu_uj as f64 / 1e6,
            dram_joules: self.has_dram().then(|| dram_uj as f64 / 1e6),
            source: EnergySource::Rapl,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RaplSnapshot {
    packages_uj: Vec<u64>,
    dram_uj: Vec<u64>,
}

/// Raw counter snapshot; interpret through [`EnergyMeter::delta`].
#[derive(Debug, Clone)]
pub enum EnergySnapshot {
    Rapl(RaplSnapshot),
    /// Seconds since the meter was created.
    Proxy(f64),
}

enum Backend {
    Rapl(RaplReader),
    Proxy { cpu_watts: f64, dram_watts: f64 },
}

/// Environment variable forcing the proxy backend regardless of RAPL
/// availability.
pub const FORCE_PROXY_ENV: &str = "SAMO_FORCE_PROXY";

/// Unified energy measurement front-end.
pub struct EnergyMeter {
    backend: Backend,
    origin: Instant,
}

impl EnergyMeter {
    /// RAPL when present and readable, otherwise the proxy (with a logged
    /// warning). `SAMO_FORCE_PROXY=1` skips RAPL entirely.
    pub fn auto(cpu_watts: f64, dram_watts: f64) -> Self {
        if std::env::var(FORCE_PROXY_ENV).map(|v| !v.is_empty() && v != "0") == Ok(true) {
            return Self::proxy(cpu_watts, dram_watts);
        }
        match RaplReader::discover() {
            Ok(reader) => Self::rapl(reader),
            Err(e) => {
                log::warn!("RAPL unavailable ({e}); falling back to proxy energy");
                Self::proxy(cpu_watts, dram_watts)
            }
        }
    }

    pub fn rapl(reader: RaplReader) -> Self {
        Self {
            backend: Backend::Rapl(reader),
            origin: Instant::now(),
        }
    }

    /// Synthetic energy: `joules = watts × scope wall seconds`. Useful
    /// only for exercising the pipeline; never comparable to RAPL runs.
    pub fn proxy(cpu_watts: f64, dram_watts: f64) -> Self {
        Self {
            backend: Backend::Proxy {
                cpu_watts,
                dram_watts,
            },
            origin: Instant::now(),
        }
    }

    pub fn source(&self) -> EnergySource {
        match self.backend {
            Backend::Rapl(_) => EnergySource::Rapl,
            Backend::Proxy { .. } => EnergySource::Proxy,
        }
    }

    pub fn has_dram(&self) -> bool {
        match &self.backend {
            Backend::Rapl(r) => r.has_dram(),
            Backend::Proxy { .. } => true,
        }
    }

    /// Raw counter read (proxy counters advance with wall time).
    pub fn snapshot(&self) -> Result<EnergySnapshot, ProfileError> {
        match &self.backend {
            Backend::Rapl(r) => Ok(EnergySnapshot::Rapl(r.read()?)),
            Backend::Proxy { .. } => Ok(EnergySnapshot::Proxy(self.origin.elapsed().as_secs_f64())),
        }
    }

    /// Energy between two snapshots. For the proxy backend the energy is
    /// derived from `wall_seconds` exactly, so a scope's proxy joules are
    /// `watts × wall` to machine precision.
    pub fn delta(
        &self,
        before: &EnergySnapshot,
        after: &EnergySnapshot,
        wall_seconds: f64,
    ) -> EnergyReading {
        match (&self.backend, before, after) {
            (Backend::Rapl(r), EnergySnapshot::Rapl(b), EnergySnapshot::Rapl(a)) => r.delta(b, a),
            (
                Backend::Proxy {
                    cpu_watts,
                    dram_watts,
                },
                _,
                _,
            ) => EnergyReading {
                cpu_joules: cpu_watts * wall_seconds,
                dram_joules: Some(dram_watts * wall_seconds),
                source: EnergySource::Proxy,
            },
            _ => unreachable!("snapshots always come from this meter"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_formula() {
        assert_eq!(wrap_corrected_delta(10, 25, 1000), 15);
        // Forced wraparound: counter2 < counter1.
        assert_eq!(wrap_corrected_delta(900, 50, 1000), 150);
        assert_eq!(wrap_corrected_delta(7, 7, 1000), 0);
    }

    #[test]
    fn proxy_scope_energy_is_watts_times_wall() {
        let meter = EnergyMeter::proxy(50.0, 5.0);
        let a = meter.snapshot().unwrap();
        let b = meter.snapshot().unwrap();
        let reading = meter.delta(&a, &b, 2.0);
        assert_eq!(reading.cpu_joules, 100.0);
        assert_eq!(reading.dram_joules, Some(10.0));
        assert_eq!(reading.source, EnergySource::Proxy);
    }

    #[test]
    fn proxy_counters_are_monotone() {
        let meter = EnergyMeter::proxy(1.0, 1.0);
        let EnergySnapshot::Proxy(a) = meter.snapshot().unwrap() else {
            panic!("proxy meter must give proxy snapshots");
        };
        let EnergySnapshot::Proxy(b) = meter.snapshot().unwrap() else {
            panic!("proxy meter must give proxy snapshots");
        };
        assert!(b >= a);
    }

    #[test]
    fn discovery_reads_fake_powercap_tree() {
        let dir = tempfile::tempdir().unwrap();
        let pkg = dir.path().join("intel-rapl:0");
        std::fs::create_dir(&pkg).unwrap();
        std::fs::write(pkg.join("name"), "package-0\n").unwrap();
        std::fs::write(pkg.join("energy_uj"), "123456\n").unwrap();
        std::fs::write(pkg.join("max_energy_range_uj"), "262143328850\n").unwrap();
        let dram = dir.path().join("intel-rapl:0:0");
        std::fs::create_dir(&dram).unwrap();
        std::fs::write(dram.join("name"), "dram\n").unwrap();
        std::fs::write(dram.join("energy_uj"), "1000\n").unwrap();
        std::fs::write(dram.join("max_energy_range_uj"), "65712999613\n").unwrap();

        let reader = RaplReader::discover_at(dir.path()).unwrap();
        assert!(reader.has_dram());
        let before = reader.read().unwrap();
        std::fs::write(pkg.join("energy_uj"), "2123456\n").unwrap();
        std::fs::write(dram.join("energy_uj"), "51000\n").unwrap();
        let after = reader.read().unwrap();
        let reading = reader.delta(&before, &after);
        assert!((reading.cpu_joules - 2.0).abs() < 1e-12);
        assert!((reading.dram_joules.unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(reading.source, EnergySource::Rapl);
    }

    #[test]
    fn discovery_fails_cleanly_without_domains() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            RaplReader::discover_at(dir.path()),
            Err(ProfileError::RaplUnavailable(_))
        ));
    }
}
