//! Little-endian encoding of `pi = (pk_OSS, c, sigma, u, y, z)`:
//! `u32 body_len` then six sections, each `u32 count` followed by its items.
//! Vectors over GF(2) are `u8 len | u64 bits`.

use super::{PvError, PvProof, Result};
use crate::gf2::Gf2Vector;
use crate::oss::multi::{MultiSignature, MultiVk};
use crate::pfc::{Basis, Commitment, Opening};

fn put_vec(out: &mut Vec<u8>, v: &Gf2Vector) {
    out.push(v.len() as u8);
    out.extend_from_slice(&v.bits().to_le_bytes());
}

fn put_count(out: &mut Vec<u8>, n: usize) {
    out.extend_from_slice(&(n as u32).to_le_bytes());
}

pub fn encode_proof(p: &PvProof) -> Vec<u8> {
    let mut b = Vec::new();
    put_count(&mut b, p.pk_oss.labels.len());
    for l in &p.pk_oss.labels {
        b.extend_from_slice(&l.to_le_bytes());
    }
    put_count(&mut b, p.c.len());
    for c in &p.c {
        b.extend_from_slice(&c.vk.to_le_bytes());
        put_vec(&mut b, &c.sig);
        b.extend_from_slice(&c.vk_bar.to_le_bytes());
    }
    put_count(&mut b, p.sigma.parts.len());
    for s in &p.sigma.parts {
        put_vec(&mut b, s);
    }
    put_count(&mut b, p.u.len());
    for o in &p.u {
        b.push(match o.basis {
            Basis::Z => 0,
            Basis::X => 1,
        });
        b.push(u8::from(o.bit));
        put_vec(&mut b, &o.u);
    }
    put_count(&mut b, p.y.len());
    b.extend_from_slice(&p.y);
    put_count(&mut b, p.z.len());
    b.extend_from_slice(&p.z);
    let mut out = (b.len() as u32).to_le_bytes().to_vec();
    out.extend_from_slice(&b);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(PvError::Wire(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn count(&mut self) -> Result<usize> {
        let n = self.u32()? as usize;
        if n > self.buf.len() {
            return Err(PvError::Wire(format!("count {n} exceeds the buffer")));
        }
        Ok(n)
    }

    fn vec(&mut self) -> Result<Gf2Vector> {
        let len = self.u8()? as usize;
        let bits = self.u64()?;
        Gf2Vector::new(len, bits).map_err(|e| PvError::Wire(e.to_string()))
    }
}

pub fn decode_proof(bytes: &[u8]) -> Result<PvProof> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let len = r.u32()? as usize;
    if bytes.len() != 4 + len {
        return Err(PvError::Wire(format!("length prefix {len} disagrees with {} body bytes", bytes.len() - 4)));
    }
    let n = r.count()?;
    let labels = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    let n = r.count()?;
    let mut c = Vec::with_capacity(n);
    for _ in 0..n {
        let vk = r.u64()?;
        let sig = r.vec()?;
        let vk_bar = r.u64()?;
        c.push(Commitment { vk, sig, vk_bar });
    }
    let n = r.count()?;
    let parts = (0..n).map(|_| r.vec()).collect::<Result<Vec<_>>>()?;
    let n = r.count()?;
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let basis = match r.u8()? {
            0 => Basis::Z,
            1 => Basis::X,
            b => return Err(PvError::Wire(format!("basis tag {b}"))),
        };
        let bit = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(PvError::Wire(format!("bit byte {b}"))),
        };
        u.push(Opening { basis, bit, u: r.vec()? });
    }
    let n = r.count()?;
    let y = r.take(n)?.to_vec();
    let n = r.count()?;
    let z = r.take(n)?.to_vec();
    if r.pos != bytes.len() {
        return Err(PvError::Wire("trailing bytes".into()));
    }
    Ok(PvProof { pk_oss: MultiVk { labels }, c, sigma: MultiSignature { parts }, u, y, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_framing() {
        let v = Gf2Vector::new(5, 0b10110).unwrap();
        let p = PvProof {
            pk_oss: MultiVk { labels: vec![1, 2, 3] },
            c: vec![Commitment { vk: 4, sig: v, vk_bar: 5 }],
            sigma: MultiSignature { parts: vec![v, v] },
            u: vec![Opening { basis: Basis::X, bit: true, u: v }],
            y: vec![9; 36],
            z: vec![8; 32],
        };
        let b = encode_proof(&p);
        assert_eq!(b.len(), super::super::proof_wire_size(3, 1, 2, 1, 36, 32));
        assert_eq!(decode_proof(&b).unwrap(), p);
        assert!(decode_proof(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(decode_proof(&extra).is_err());
    }
}
