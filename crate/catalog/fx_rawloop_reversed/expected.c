#include <iostream>
#include <algorithm>
#include <functional>

bool has_zero(double vals[])
{
    const bool hit =
      (find(begin(vals),end(vals),0) !=
       end(vals));
    return hit;
}
