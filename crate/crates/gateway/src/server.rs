//! WebSocket front end. Connection tasks only decode frames and forward
//! them; one sim task owns the [`Session`] and ticks it on a fixed interval.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::time::Duration;

use anyhow::Context;
use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot};
use tokio::time::{interval, MissedTickBehavior};
use tokio_tungstenite::tungstenite::Message;
use tracing::{debug, info, warn};

use crate::protocol::{parse_client, ClientCommand, ErrorCode, Rejection};
use crate::session::{ClientId, Outbound, Session, SessionConfig};

enum Inbound {
    Connected { outbox: mpsc::UnboundedSender<String>, reply: oneshot::Sender<ClientId> },
    Command { id: ClientId, command: ClientCommand },
    Disconnected { id: ClientId },
}

pub struct Server {
    listener: TcpListener,
    config: SessionConfig,
}

impl Server {
    /// Binds the listening socket; a busy port fails here, before anything
    /// is served.
    pub async fn bind(addr: SocketAddr, config: SessionConfig) -> anyhow::Result<Self> {
        anyhow::ensure!(config.tick_hz > 0.0 && config.tick_hz.is_finite(), "tick rate must be positive");
        anyhow::ensure!(config.snapshot_hz > 0.0 && config.snapshot_hz.is_finite(), "snapshot rate must be positive");
        let listener = TcpListener::bind(addr).await.with_context(|| format!("cannot listen on {addr}"))?;
        Ok(Self { listener, config })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub async fn run(self) -> anyhow::Result<()> {
        let (tx, rx) = mpsc::unbounded_channel();
        info!(addr = %self.listener.local_addr()?, "serving");
        let mut sim = tokio::spawn(sim_loop(Session::new(self.config), rx));
        loop {
            tokio::select! {
                accepted = self.listener.accept() => {
                    let (stream, peer) = accepted.context("accept failed")?;
                    tokio::spawn(connection(stream, peer, tx.clone()));
                }
                res = &mut sim => {
                    res.context("sim task panicked")?;
                    anyhow::bail!("sim task stopped");
                }
            }
        }
    }
}

async fn sim_loop(mut session: Session, mut inbox: mpsc::UnboundedReceiver<Inbound>) {
    let mut clients: HashMap<ClientId, mpsc::UnboundedSender<String>> = HashMap::new();
    let mut ticker = interval(Duration::from_secs_f64(1.0 / session.config().tick_hz));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            _ = ticker.tick() => {
                let out = session.step();
                dispatch(&clients, out);
            }
            msg = inbox.recv() => {
                let Some(msg) = msg else { return };
                let out = match msg {
                    Inbound::Connected { outbox, reply } => {
                        let (id, out) = session.connect();
                        clients.insert(id, outbox);
                        let _ = reply.send(id);
                        out
                    }
                    Inbound::Command { id, command } => session.receive(id, command),
                    Inbound::Disconnected { id } => {
                        clients.remove(&id);
                        session.disconnect(id)
                    }
                };
                dispatch(&clients, out);
            }
        }
    }
}

fn dispatch(clients: &HashMap<ClientId, mpsc::UnboundedSender<String>>, out: Vec<Outbound>) {
    for item in out {
        match item {
            Outbound::To(id, msg) => {
                if let Some(tx) = clients.get(&id) {
                    let _ = tx.send(msg.to_json());
                }
            }
            Outbound::All(msg) => {
                let text = msg.to_json();
                for tx in clients.values() {
                    let _ = tx.send(text.clone());
                }
            }
        }
    }
}

async fn connection(stream: TcpStream, peer: SocketAddr, sim: mpsc::UnboundedSender<Inbound>) {
    let ws = match tokio_tungstenite::accept_async(stream).await {
        Ok(ws) => ws,
        Err(err) => {
            debug!(%peer, %err, "handshake failed");
            return;
        }
    };
    let (mut sink, mut source) = ws.split();
    let (outbox, mut outgoing) = mpsc::unbounded_channel::<String>();
    let (reply, id) = oneshot::channel();
    if sim.send(Inbound::Connected { outbox: outbox.clone(), reply }).is_err() {
        return;
    }
    let Ok(id) = id.await else { return };
    debug!(%peer, client = id, "websocket open");

    let writer = tokio::spawn(async move {
        while let Some(text) = outgoing.recv().await {
            if sink.send(Message::text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(frame) = source.next().await {
        let text = match frame {
            Ok(Message::Text(text)) => text,
            Ok(Message::Binary(_)) => {
                let rejection =
                    Rejection::new(ErrorCode::MalformedMessage, "binary frames are not part of the protocol");
                let _ = outbox.send(rejection.into_message().to_json());
                continue;
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => continue,
            Err(err) => {
                warn!(client = id, %err, "socket error");
                break;
            }
        };
        match parse_client(text.as_str()) {
            Ok(command) => {
                if sim.send(Inbound::Command { id, command }).is_err() {
                    break;
                }
            }
            Err(rejection) => {
                let _ = outbox.send(rejection.into_message().to_json());
            }
        }
    }
    let _ = sim.send(Inbound::Disconnected { id });
    drop(outbox);
    writer.abort();
}
