//! A two-job, one-machine net built by hand: a controlled dispatch, a timed
//! processing transition and a machine place with single occupancy.

use petri_fms::petri::{CTPNet, Color, DelaySource, Halt, PlaceRole, Token, TransitionKind, TransitionSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut net = CTPNet::new();
    let queue = net.add_place("queue", PlaceRole::Generic);
    let idle = net.add_place_with_capacity("machine_idle", PlaceRole::Generic, Some(1));
    let busy = net.add_place("busy", PlaceRole::Generic);
    let done = net.add_place("done", PlaceRole::Generic);

    for (job, d) in [(0, 4), (1, 2)] {
        net.add_token(queue, Token::new(Color::job(job), d, 0, 0))?;
    }
    net.add_token(idle, Token::marker(Color::machine(0)))?;

    let start = net.add_transition(
        TransitionSpec::new("start", TransitionKind::Controlled)
            .input(queue)
            .input(idle)
            .output(busy, 0),
    )?;
    net.add_transition(
        TransitionSpec::new("finish", TransitionKind::Timed)
            .input(busy)
            .timed(0, DelaySource::ProcessTime)
            .output(done, 0)
            .output_fresh(idle, Color::machine(0)),
    )?;

    loop {
        let adv = net.advance()?;
        for f in &adv.fired {
            println!("t={:>2} fired {}", f.at, net.transition(f.transition)?.name);
        }
        match adv.halt {
            Halt::Decision => {
                let f = net.trigger(start)?;
                println!("t={:>2} fired start (job {:?})", f.at, f.consumed[0].color.job);
            }
            Halt::Terminal => break,
            Halt::NeedsDelay(_) => unreachable!(),
        }
    }
    println!("marking {:?} at t={}", net.marking(), net.clock());
    Ok(())
}
