//! Little-endian binary encoding of proofs:
//! `u32 body_len | rt | u32 q | q * (u32 index | value | u8 depth | depth * node)`.

use super::{AuthPath, Node, QueryOpening, Result, SnarkError, SnarkProof, NODE_BYTES};

pub fn encode_proof(p: &SnarkProof) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&p.root);
    body.extend_from_slice(&(p.openings.len() as u32).to_le_bytes());
    for o in &p.openings {
        body.extend_from_slice(&o.index.to_le_bytes());
        body.extend_from_slice(&o.value);
        body.push(o.path.siblings.len() as u8);
        for s in &o.path.siblings {
            body.extend_from_slice(s);
        }
    }
    let mut out = (body.len() as u32).to_le_bytes().to_vec();
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(SnarkError::Wire(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn node(&mut self) -> Result<Node> {
        Ok(self.take(NODE_BYTES)?.try_into().expect("node bytes"))
    }
}

pub fn decode_proof(bytes: &[u8]) -> Result<SnarkProof> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let len = r.u32()? as usize;
    if bytes.len() != 4 + len {
        return Err(SnarkError::Wire(format!("length prefix {len} disagrees with {} body bytes", bytes.len() - 4)));
    }
    let root = r.node()?;
    let q = r.u32()? as usize;
    let mut openings = Vec::with_capacity(q.min(1024));
    for _ in 0..q {
        let index = r.u32()?;
        let value = r.node()?;
        let depth = r.take(1)?[0] as usize;
        let siblings = (0..depth).map(|_| r.node()).collect::<Result<Vec<_>>>()?;
        openings.push(QueryOpening { index, value, path: AuthPath { siblings } });
    }
    if r.pos != bytes.len() {
        return Err(SnarkError::Wire("trailing bytes".into()));
    }
    Ok(SnarkProof { root, openings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_framing() {
        let p = SnarkProof {
            root: [1u8; 16],
            openings: vec![QueryOpening { index: 5, value: [2u8; 16], path: AuthPath { siblings: vec![[3u8; 16]; 2] } }],
        };
        let b = encode_proof(&p);
        assert_eq!(b.len(), 4 + 16 + 4 + (4 + 16 + 1 + 32));
        assert_eq!(decode_proof(&b).unwrap(), p);
        assert!(decode_proof(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(decode_proof(&extra).is_err());
    }
}
