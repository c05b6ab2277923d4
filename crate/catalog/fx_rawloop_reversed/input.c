#include <iostream>

bool has_zero(double vals[])
{
    bool hit = false;
    for ( double &v : vals )
        if ( 0 == v )
        {
            hit = true;
            break;
        }
    return hit;
}
