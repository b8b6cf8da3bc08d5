//! Starts the TCP bridge on an ephemeral port and drives one episode
//! through it with the blocking client.

use std::thread;

use paint_wars::bridge::{BridgeConfig, Client, Server};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = Server::bind("127.0.0.1:0", BridgeConfig::default())?;
    let addr = server.local_addr()?;
    let handle = thread::spawn(move || server.serve_one());

    let mut client = Client::connect(addr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let first = client.reset(false)?;
    println!("pink starts at ({}, {})", first.pink_obs[0], first.pink_obs[1]);
    let mut returns = [0.0; 2];
    let mut steps = 0;
    loop {
        let r = client.step(rng.random_range(0..5), rng.random_range(0..5))?;
        returns[0] += r.pink_reward;
        returns[1] += r.green_reward;
        steps += 1;
        if r.done {
            break;
        }
    }
    println!("{steps} steps, returns {:.1} / {:.1}", returns[0], returns[1]);
    println!("after done: {}", client.exchange(r#"{"pink_action":0,"green_action":0}"#)?);
    drop(client);
    handle.join().expect("server thread")?;
    Ok(())
}
