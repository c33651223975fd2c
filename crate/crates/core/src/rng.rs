//! Counter-based random streams.
//!
//! A stream is a ChaCha8 keystream: the key comes from the master seed and the
//! 64-bit stream number from a stable hash of a label path. Two streams with
//! different labels never share output, and a stream's content does not depend
//! on the order in which streams are created, so replications can run on any
//! thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a over a byte string.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME)
    })
}

/// A labelled position in the stream tree rooted at a master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    master: u64,
    id: u64,
}

impl StreamKey {
    pub fn root(master: u64) -> Self {
        StreamKey {
            master,
            id: FNV_OFFSET,
        }
    }

    pub fn child(&self, label: &str) -> Self {
        self.child_bytes(label.as_bytes())
    }

    pub fn index(&self, i: u64) -> Self {
        self.child_bytes(&i.to_le_bytes())
    }

    fn child_bytes(&self, bytes: &[u8]) -> Self {
        let mut h = self.id;
        // length prefix keeps ("ab","c") and ("a","bc") apart
        for b in (bytes.len() as u64).to_le_bytes().iter().chain(bytes) {
            h = (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME);
        }
        let mut s = h;
        StreamKey {
            master: self.master,
            id: splitmix(&mut s),
        }
    }

    /// Stream number, reported in CSV output.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self) -> StreamRng {
        let mut state = self.master;
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.id);
        rng
    }
}
