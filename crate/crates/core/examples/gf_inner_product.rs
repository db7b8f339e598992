//! Arithmetic in GF(2^8) and a packed four-limb inner product.

use seedless::gf::{packed_inner_product, to_limbs, FieldParams};

fn main() -> seedless::Result<()> {
    let f = FieldParams::standard(8)?;
    println!("{f:?}");
    let (a, b) = (0x53, 0xCA);
    println!("{a:#04x} * {b:#04x} = {:#04x}", f.mul(a, b));
    println!("inverse of {a:#04x} = {:#04x}", f.inv(a)?);
    let (u, v) = (0x0102_0304u64, 0x1122_3344u64);
    println!("limbs of u: {:x?}", to_limbs(u, 8, 4));
    println!("<u, v> = {:#04x}", packed_inner_product(&f, u, v, 4));
    Ok(())
}
