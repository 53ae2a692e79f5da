use sv_frontend::{parse_program, resolve, MethodDef};

pub const ADD: &str = "
int add(int k1, int k2)
  requires (k1>0 & k2>0 & k1+k2>inf)
         | (k1>0 & k2<=0 & k1+k2<-inf)
         | (k1<=0 & k2>0 & k1+k2<-inf)
         | (k1<=0 & k2<=0 & k1+k2<-inf & k1!=0)
  ensures_err true
  requires (k1>0 & k2>0 & k1+k2<=inf)
         | (k1>0 & k2<=0 & k1+k2>=-inf)
         | (k1<=0 & k2>0 & k1+k2>=-inf)
         | (k1<=0 & k2<=0 & (k1+k2>=-inf | k1=0))
  ensures res=k1+k2;
";

pub const UADD: &str = "
uint uadd(uint k1, uint k2)
  requires k1+k2>inf
  ensures_err true
  requires k1+k2<=inf
  ensures res=k1+k2;
";

pub const SUB: &str = "
int sub(int k1, int k2)
  requires (k1>=0 & k2<0 & k1-k2>inf)
         | (k1<0 & k2>0 & k1-k2<-inf)
  ensures_err true
  requires (k1>=0 & k2<0 & k1-k2<=inf)
         | (k1<0 & k2>0 & k1-k2>=-inf)
         | (k1>=0 & k2>=0)
         | (k1<0 & k2<=0)
  ensures res=k1-k2;
";

pub const USUB: &str = "
uint usub(uint k1, uint k2)
  requires k1<k2
  ensures_err true
  requires k1>=k2
  ensures res=k1-k2;
";

/// The builtin operation specs; subtraction only when `with_sub`.
pub fn builtin_methods(with_sub: bool) -> Vec<MethodDef> {
    let mut src = format!("{ADD}{UADD}");
    if with_sub {
        src.push_str(SUB);
        src.push_str(USUB);
    }
    let p = resolve(&parse_program(&src).expect("builtin specs parse")).expect("builtin specs resolve");
    p.methods
}

pub fn is_builtin(name: &str) -> bool {
    matches!(name, "add" | "uadd" | "sub" | "usub")
}
