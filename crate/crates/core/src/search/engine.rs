use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fitness::{performance_heuristic, preference_sorting, subvector_dominance, ProxyVector, TargetModel};
use crate::interp::{execute_test, ExecOptions, ExecutionTrace};
use crate::program::{Cdg, EdgeId, TargetKind};
use crate::subject::Subject;
use crate::testcase::{crossover_single_point, mutate_uniform, random_test, Provenance, TestCase, TestSuite};

use super::record::suite_cost;
use super::{
    minimize, suite_coverage, Archive, GenerationLog, Heuristic, HeuristicPolicy, HeuristicState, RunOutput,
    RunRecord, SearchConfig,
};

struct Individual {
    test: TestCase,
    trace: ExecutionTrace,
    proxies: ProxyVector,
    rank: usize,
    secondary: f64,
}

/// Activates the targets that depend on each newly taken edge.
pub fn update_targets(active: &mut [bool], newly_taken: &[EdgeId], cdg: &Cdg) {
    for &e in newly_taken {
        for &t in cdg.targets_on_edge(e) {
            active[t] = true;
        }
    }
}

struct Search<'a> {
    subject: &'a Subject,
    config: &'a SearchConfig,
    model: TargetModel,
    options: ExecOptions,
    rng: ChaCha8Rng,
    archive: Archive,
    evaluations: u64,
    edge_taken: Vec<bool>,
    active: Vec<bool>,
    log: Vec<GenerationLog>,
}

impl<'a> Search<'a> {
    fn new(subject: &'a Subject, config: &'a SearchConfig) -> Self {
        let model = TargetModel::new(subject, &config.criteria);
        let archive = Archive::new(config.archive_policy(), model.targets.iter().map(|t| t.id.clone()).collect());
        let mut active = vec![false; model.len()];
        for t in model.cdg.entry_points() {
            active[t] = true;
        }
        let weak = config.criteria.contains(&TargetKind::WeakMutant);
        Search {
            subject,
            config,
            options: ExecOptions { limits: config.limits, weak, observe: false },
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            archive,
            evaluations: 0,
            edge_taken: vec![false; subject.cfg.branches.len() * 2],
            active,
            log: Vec::new(),
            model,
        }
    }

    fn remaining(&self) -> u64 {
        self.config.budget.saturating_sub(self.evaluations)
    }

    fn done(&self) -> bool {
        self.remaining() == 0 || self.archive.all_covered()
    }

    fn evaluate(&mut self, test: TestCase) -> Individual {
        self.evaluations += 1;
        let trace = execute_test(self.subject, &test, &self.options);
        let proxies = ProxyVector::new(trace.dynamic_proxies(&self.subject.cfg), test.static_proxies());
        Individual { test, trace, proxies, rank: 0, secondary: 0.0 }
    }

    fn update_archive(&mut self, batch: &[Individual], generation: usize) {
        for ind in batch {
            for t in 0..self.model.len() {
                if ind.trace.covers(&self.model.targets[t]) {
                    self.archive.offer(t, &ind.test, ind.proxies, generation);
                }
            }
        }
    }

    fn update_active(&mut self, batch: &[Individual]) {
        let mut fresh = Vec::new();
        for ind in batch {
            for (e, &f) in ind.trace.edge_frequency.iter().enumerate() {
                if f > 0 && !self.edge_taken[e] {
                    self.edge_taken[e] = true;
                    fresh.push(e);
                }
            }
        }
        update_targets(&mut self.active, &fresh, &self.model.cdg);
    }

    fn uncovered_active(&self) -> Vec<usize> {
        (0..self.model.len()).filter(|&t| self.active[t] && !self.archive.is_covered(t)).collect()
    }

    fn objectives(&self, ind: &Individual, targets: &[usize]) -> Vec<f64> {
        targets.iter().map(|&t| self.model.objective(&ind.trace, t)).collect()
    }

    fn best_values(&self, batch: &[Individual], targets: &[usize]) -> Vec<f64> {
        targets
            .iter()
            .map(|&t| batch.iter().map(|i| self.model.objective(&i.trace, t)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    fn push_log(&mut self, generation: usize, heuristic: Option<Heuristic>, state: &HeuristicState) {
        let mut covered: BTreeMap<TargetKind, usize> = self.config.criteria.iter().map(|&k| (k, 0)).collect();
        for (t, _, _) in self.archive.entries() {
            *covered.entry(self.model.targets[t].kind).or_default() += 1;
        }
        let uncovered_active = self.uncovered_active().len();
        self.log.push(GenerationLog {
            generation,
            evaluations: self.evaluations,
            covered,
            uncovered_active,
            heuristic,
            performance_counter: state.performance_counter,
            crowding_counter: state.crowding_counter,
            archive_size: self.archive.covered_count(),
        });
    }

    fn tournament(&mut self, pop: &[Individual]) -> usize {
        let mut best = self.rng.gen_range(0..pop.len());
        for _ in 1..self.config.tournament {
            let c = self.rng.gen_range(0..pop.len());
            let (a, b) = (&pop[c], &pop[best]);
            if a.rank < b.rank || (a.rank == b.rank && a.secondary > b.secondary) {
                best = c;
            }
        }
        best
    }

    fn offspring(&mut self, pop: &[Individual], count: usize) -> Vec<Individual> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let (p1, p2) = (self.tournament(pop), self.tournament(pop));
            let (mut c1, mut c2) = if self.rng.gen_bool(self.config.crossover_rate) {
                crossover_single_point(self.subject, &pop[p1].test, &pop[p2].test, &self.config.genome, &mut self.rng)
            } else {
                (pop[p1].test.clone(), pop[p2].test.clone())
            };
            if self.config.mutation {
                c1 = mutate_uniform(self.subject, &c1, &self.config.genome, &mut self.rng);
                c2 = mutate_uniform(self.subject, &c2, &self.config.genome, &mut self.rng);
            }
            for c in [c1, c2] {
                if out.len() < count {
                    out.push(self.evaluate(c));
                }
            }
        }
        out
    }

    /// Ranks `union` and keeps the best `size`, scoring fronts with `h`.
    fn select(&self, mut union: Vec<Individual>, size: usize, h: Heuristic) -> Vec<Individual> {
        let targets = self.uncovered_active();
        let objs: Vec<Vec<f64>> = union.iter().map(|i| self.objectives(i, &targets)).collect();
        let lengths: Vec<usize> = union.iter().map(|i| i.test.len()).collect();
        let fronts = preference_sorting(&objs, &lengths);
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        for (rank, front) in fronts.iter().enumerate() {
            if chosen.len() >= size {
                break;
            }
            let scores = match h {
                Heuristic::Crowding => subvector_dominance(&front.iter().map(|&i| objs[i].as_slice()).collect::<Vec<_>>()),
                Heuristic::Performance => {
                    performance_heuristic(&front.iter().map(|&i| union[i].proxies).collect::<Vec<_>>())
                }
            };
            for (&i, &s) in front.iter().zip(&scores) {
                union[i].rank = rank;
                union[i].secondary = s;
            }
            let mut order: Vec<usize> = front.clone();
            if chosen.len() + front.len() > size {
                // Partial front: best secondary score first, stable on ties.
                order.sort_by(|&a, &b| union[b].secondary.total_cmp(&union[a].secondary));
                order.truncate(size - chosen.len());
            }
            chosen.extend(order);
        }
        chosen.sort_unstable();
        let mut keep = vec![false; union.len()];
        for &i in &chosen {
            keep[i] = true;
        }
        union.into_iter().zip(keep).filter_map(|(ind, k)| k.then_some(ind)).collect()
    }

    fn finish(self) -> RunOutput {
        let (algorithm, seed) = (self.config.algorithm, self.config.seed);
        let mut tests: Vec<TestCase> = Vec::new();
        for t in self.archive.tests() {
            let m = minimize(self.subject, &self.model, &t, &self.options);
            if !tests.contains(&m) {
                tests.push(m);
            }
        }
        let limits = self.config.limits;
        let record = RunRecord {
            subject: self.subject.name.clone(),
            algorithm,
            seed,
            coverage: suite_coverage(self.subject, &tests, limits),
            mutation_score: None,
            suite_size: tests.len(),
            suite_length: tests.iter().map(TestCase::len).sum(),
            suite_cost: suite_cost(self.subject, &tests, limits),
            evaluations: self.evaluations,
            generations: self.log,
            archive_events: self.archive.events.clone(),
        };
        let provenance = Provenance { subject: self.subject.name.clone(), algorithm: algorithm.to_string(), seed };
        RunOutput { suite: TestSuite { tests, provenance }, archive: self.archive, record }
    }
}

/// The many-objective loop shared by DynaMOSA and the adaptive variants.
pub(super) fn evolve(subject: &Subject, config: &SearchConfig) -> RunOutput {
    let mut s = Search::new(subject, config);
    let policy = config.heuristic_policy();
    let mut state = HeuristicState::default();
    let initial = match policy {
        HeuristicPolicy::Adaptive => Heuristic::Performance,
        HeuristicPolicy::Pinned(h) => h,
    };

    let size = config.population.min(config.budget as usize);
    let mut population: Vec<Individual> = (0..size)
        .map(|_| {
            let t = random_test(subject, &config.genome, &mut s.rng);
            s.evaluate(t)
        })
        .collect();
    s.update_archive(&population, 0);
    s.update_active(&population);
    population = s.select(population, size, initial);
    s.push_log(0, Some(initial), &state);

    // Best objective of the previous offspring on the targets that were
    // uncovered and active when it was ranked.
    let mut previous: Option<(Vec<usize>, Vec<f64>)> = None;
    let mut generation = 0usize;
    while !s.done() {
        let count = (config.population as u64).min(s.remaining()) as usize;
        let offspring = s.offspring(&population, count);
        s.update_archive(&offspring, generation + 1);

        let h = match policy {
            HeuristicPolicy::Pinned(h) => h,
            HeuristicPolicy::Adaptive => {
                let (cur, prev) = match &previous {
                    Some((targets, best)) if generation > 0 => (s.best_values(&offspring, targets), best.clone()),
                    _ => (Vec::new(), Vec::new()),
                };
                super::get_secondary_heuristic(&mut state, generation, &cur, &prev)
            }
        };

        s.update_active(&offspring);
        let after = s.uncovered_active();
        let best = s.best_values(&offspring, &after);
        previous = Some((after, best));

        let mut union = population;
        union.extend(offspring);
        population = s.select(union, config.population, h);
        generation += 1;
        s.push_log(generation, Some(h), &state);
    }
    s.finish()
}

/// Independent random tests until the budget runs out or everything is covered.
pub(super) fn random_search(subject: &Subject, config: &SearchConfig) -> RunOutput {
    let mut s = Search::new(subject, config);
    let state = HeuristicState::default();
    let mut generation = 0;
    while !s.done() {
        let count = (config.population as u64).min(s.remaining());
        let batch: Vec<Individual> = (0..count)
            .map(|_| {
                let t = random_test(subject, &config.genome, &mut s.rng);
                s.evaluate(t)
            })
            .collect();
        s.update_archive(&batch, generation);
        s.update_active(&batch);
        s.push_log(generation, None, &state);
        generation += 1;
    }
    s.finish()
}
