use crate::fitness::TargetModel;
use crate::interp::{execute_test, ExecOptions};
use crate::subject::Subject;
use crate::testcase::TestCase;

fn covered(subject: &Subject, model: &TargetModel, test: &TestCase, options: &ExecOptions) -> Vec<bool> {
    let trace = execute_test(subject, test, options);
    model.targets.iter().map(|t| trace.covers(t)).collect()
}

/// One backward pass dropping every statement whose removal keeps all
/// targets the test covered. Statements still referenced are kept.
pub fn minimize(subject: &Subject, model: &TargetModel, test: &TestCase, options: &ExecOptions) -> TestCase {
    let base = covered(subject, model, test, options);
    let mut current = test.clone();
    for i in (0..current.len()).rev() {
        if current.len() == 1 {
            break;
        }
        let mut probe = current.clone();
        let referenced = probe.statements[i + 1..].iter_mut().any(|s| s.refs_mut().any(|r| *r == i));
        if referenced {
            continue;
        }
        probe.statements.remove(i);
        for s in &mut probe.statements[i..] {
            for r in s.refs_mut() {
                if *r > i {
                    *r -= 1;
                }
            }
        }
        let now = covered(subject, model, &probe, options);
        if base.iter().zip(&now).all(|(&b, &n)| !b || n) {
            current = probe;
        }
    }
    current
}
