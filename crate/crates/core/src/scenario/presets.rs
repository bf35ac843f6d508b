use super::config::{parse_config, ScenarioConfig};
use crate::{Error, Result};

const MODELS: &str = r#"
# double integrator with viscous friction under PI control
[models]
m1 = { num = [4.0, 4.0], den = [0.0, 0.0, 4.0, 1.0] }
m2 = { num = [1.0, 1.0], den = [0.0, 0.0, 3.0, 1.0] }
"#;

const FIG5: &str = r#"
schema = 1
name = "fig5"
preset = "fig5"
description = "8 agents, 4 x M1 + 4 x M2, absorbers on the first and last agent, unit step"

[chain]
segments = ["4 x m1", "4 x m2"]
absorbers = ["leader", "rear"]

[sim]
t_final_s = 80.0
dt_s = 0.01
"#;

const FIG6: &str = r#"
schema = 1
name = "fig6"
preset = "fig6"
description = "end absorbers {none, leader, both} with the soft-boundary pair off and on"

[chain]
segments = ["4 x m1", "4 x m2"]

[sim]
t_final_s = 200.0
dt_s = 0.01

[[variant]]
name = "none"
absorbers = []

[[variant]]
name = "leader"
absorbers = ["leader"]

[[variant]]
name = "both"
absorbers = ["leader", "rear"]

[[variant]]
name = "none-soft"
absorbers = ["soft:4"]

[[variant]]
name = "leader-soft"
absorbers = ["leader", "soft:4"]

[[variant]]
name = "both-soft"
absorbers = ["leader", "rear", "soft:4"]
"#;

const FIG7: &str = r#"
schema = 1
name = "fig7"
preset = "fig7"
description = "control input of agent 4: homogeneous chain, heterogeneous chain, heterogeneous chain with soft-boundary pair"

[chain]
segments = ["4 x m1", "4 x m2"]
absorbers = ["leader", "rear"]

[sim]
t_final_s = 80.0
dt_s = 0.01

[[variant]]
name = "homogeneous"
segments = ["8 x m1"]

[[variant]]
name = "heterogeneous"

[[variant]]
name = "heterogeneous-soft"
absorbers = ["leader", "rear", "soft:4"]
"#;

const FIG8: &str = r#"
schema = 1
name = "fig8"
preset = "fig8"
description = "30 x M1 + 30 x M2 with k_p varied; output of agent 31 against the soft-boundary DC gain"

[chain]
segments = ["30 x m1", "30 x m2"]

[sim]
t_final_s = 100.0
dt_s = 0.01

# the front reaches agent 31 near 40 s and the far-end reflection returns
# after 75 s for the fastest k_p
[analysis]
plateau = { agent = 31, t0_s = 45.0, t1_s = 70.0 }

[[variant]]
name = "kp0.5"
models = { m2 = { num = [0.5, 1.0], den = [0.0, 0.0, 3.0, 1.0] } }

[[variant]]
name = "kp1"

[[variant]]
name = "kp2"
models = { m2 = { num = [2.0, 1.0], den = [0.0, 0.0, 3.0, 1.0] } }

[[variant]]
name = "kp4"
models = { m2 = { num = [4.0, 1.0], den = [0.0, 0.0, 3.0, 1.0] } }
"#;

/// Names of the built-in scenarios.
pub const PRESET_NAMES: [&str; 4] = ["fig5", "fig6", "fig7", "fig8"];

/// Source text of a built-in scenario.
pub fn preset_text(name: &str) -> Result<String> {
    let body = match name {
        "fig5" => FIG5,
        "fig6" => FIG6,
        "fig7" => FIG7,
        "fig8" => FIG8,
        _ => {
            return Err(Error::Config(format!(
                "unknown preset \"{name}\"; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    // `[models]` must follow the top-level keys
    let split = body.find("\n[").unwrap_or(body.len());
    Ok(format!("{}{MODELS}{}", &body[..split], &body[split..])
        .trim_start()
        .to_string())
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    parse_config(&preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Absorber;

    #[test]
    fn all_presets_parse() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.preset.as_deref(), Some(name));
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn fig5_structure() {
        let plans = preset("fig5").unwrap().plans().unwrap();
        let c = &plans[0].chain;
        assert_eq!(c.len(), 8);
        assert_eq!(c.absorbers(), &[Absorber::Leader, Absorber::Rear]);
        assert_eq!(c.agent(4).mf().integrator_gain(), 1.0);
        assert_eq!(c.agent(5).mf().integrator_gain(), 1.0 / 3.0);
    }

    #[test]
    fn fig6_is_a_six_run_matrix() {
        let plans = preset("fig6").unwrap().plans().unwrap();
        assert_eq!(plans.len(), 6);
        let with_soft = plans
            .iter()
            .filter(|p| p.chain.has_absorber(Absorber::SoftLeft(4)))
            .count();
        assert_eq!(with_soft, 3);
    }

    #[test]
    fn fig8_desk_scale() {
        let plans = preset("fig8").unwrap().plans().unwrap();
        assert_eq!(plans.len(), 4);
        for p in &plans {
            assert_eq!(p.chain.len(), 60);
            assert_eq!(p.analysis.plateau.as_ref().unwrap().agent, 31);
        }
        let kp: Vec<f64> = plans
            .iter()
            .map(|p| p.chain.agent(31).mf().integrator_gain() * 3.0)
            .collect();
        for (got, want) in kp.iter().zip([0.5, 1.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
