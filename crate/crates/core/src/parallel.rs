//! Embarrassingly parallel exploration of the search tree.
//!
//! The tree is first expanded breadth-first until a frontier with enough
//! open nodes exists; the frontier nodes are then explored by independent
//! workers. Subtree sizes vary by orders of magnitude without any way to
//! predict them, so many subproblems are attributed per thread and workers
//! pull the next unclaimed one from a shared cursor.
//!
//! With the `parallel` feature disabled the same plan is executed
//! sequentially, which keeps counts identical by construction.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::adjacency::CandidateSets;
#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;
use crate::search::{
    drive_search, Decision, SearchOptions, SearchProblem, SearchState, SearchStats, Solution,
};

/// Subtrees attributed to each worker thread by default.
pub const DEFAULT_SUBTREES_PER_THREAD: usize = 4096;

/// One open node of the search tree, reconstructed by replaying its branch
/// decisions from the root; filtering and forced moves replay
/// deterministically.
#[derive(Clone, Debug)]
pub struct Subproblem {
    pub prefix: Vec<Decision>,
}

/// A partition of the search tree: the subproblem subtrees are disjoint and,
/// together with the solutions already found during splitting, exhaustive.
pub struct WorkPlan {
    pub subproblems: Vec<Subproblem>,
    pub presplit_stats: SearchStats,
    pub presplit_solutions: Vec<Solution>,
}

/// Expand the root breadth-first until at least `goal` open nodes exist or
/// the tree is exhausted. Solutions reached during expansion are recorded in
/// the plan; they lie above the frontier and belong to no subproblem.
pub fn split(problem: &SearchProblem, options: &SearchOptions, goal: usize) -> Result<WorkPlan> {
    let mut state = SearchState::new(problem)?;
    let mut levels: Vec<CandidateSets> = Vec::new();
    let mut stats = SearchStats::default();
    let mut solutions: Vec<Solution> = Vec::new();
    let mut queue: VecDeque<Vec<Decision>> = VecDeque::new();
    queue.push_back(Vec::new());

    while !queue.is_empty() && queue.len() < goal.max(1) {
        let prefix = queue.pop_front().unwrap();
        let mut children: Vec<Vec<Decision>> = Vec::new();
        let s = drive_search(
            &mut state,
            &mut levels,
            options,
            &prefix,
            Some(&mut children),
            &mut |hexes| {
                solutions.push(Solution {
                    hexes: hexes.to_vec(),
                });
            },
        );
        stats.merge(&s);
        if stats.aborted {
            break;
        }
        queue.extend(children);
    }

    Ok(WorkPlan {
        subproblems: queue
            .into_iter()
            .map(|prefix| Subproblem { prefix })
            .collect(),
        presplit_stats: stats,
        presplit_solutions: solutions,
    })
}

struct WorkerOutput {
    stats: SearchStats,
    solutions: Vec<Solution>,
}

fn run_worker(
    problem: &SearchProblem,
    options: &SearchOptions,
    plan: &WorkPlan,
    cursor: &AtomicUsize,
    collect: bool,
) -> WorkerOutput {
    let mut state = SearchState::new(problem).expect("problem validated before planning");
    let mut levels: Vec<CandidateSets> = Vec::new();
    let mut stats = SearchStats::default();
    let mut solutions: Vec<Solution> = Vec::new();
    loop {
        let i = cursor.fetch_add(1, Ordering::Relaxed);
        let Some(sub) = plan.subproblems.get(i) else {
            break;
        };
        let s = drive_search(
            &mut state,
            &mut levels,
            options,
            &sub.prefix,
            None,
            &mut |hexes| {
                if collect {
                    solutions.push(Solution {
                        hexes: hexes.to_vec(),
                    });
                }
            },
        );
        stats.merge(&s);
        if stats.aborted {
            break;
        }
    }
    WorkerOutput { stats, solutions }
}

/// Explore every subproblem of the plan, pulling work dynamically. The
/// total solution count equals the sequential count; a worker panic aborts
/// the whole run.
pub fn run_plan(
    problem: &SearchProblem,
    options: &SearchOptions,
    plan: WorkPlan,
    n_threads: usize,
    collect: bool,
) -> Result<(SearchStats, Vec<Solution>)> {
    let mut stats = plan.presplit_stats;
    let mut solutions = Vec::new();
    if collect {
        solutions.extend(plan.presplit_solutions.iter().cloned());
    }
    let cursor = AtomicUsize::new(0);
    let outputs = Mutex::new(Vec::<WorkerOutput>::new());

    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n_threads)
            .stack_size(16 << 20)
            .build()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
        pool.scope(|scope| {
            for _ in 0..n_threads {
                scope.spawn(|_| {
                    let out = run_worker(problem, options, &plan, &cursor, collect);
                    outputs.lock().unwrap().push(out);
                });
            }
        });
    }

    #[cfg(not(feature = "parallel"))]
    {
        let _ = n_threads;
        let out = run_worker(problem, options, &plan, &cursor, collect);
        outputs.lock().unwrap().push(out);
    }

    for out in outputs.into_inner().unwrap() {
        stats.merge(&out.stats);
        solutions.extend(out.solutions);
    }
    Ok((stats, solutions))
}

/// Split and run with `n_threads` workers (`0` = autodetect). One thread
/// short-circuits to the plain sequential search.
pub fn parallel_search(
    problem: &SearchProblem,
    options: &SearchOptions,
    n_threads: usize,
    target_per_thread: usize,
    collect: bool,
) -> Result<(SearchStats, Vec<Solution>)> {
    let n_threads = if n_threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        n_threads
    };
    if n_threads <= 1 {
        return if collect {
            crate::search::collect_solutions(problem, options)
        } else {
            crate::search::count_solutions(problem, options).map(|s| (s, Vec::new()))
        };
    }
    let plan = split(problem, options, n_threads * target_per_thread.max(1))?;
    run_plan(problem, options, plan, n_threads, collect)
}
