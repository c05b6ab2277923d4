#include <iostream>

bool any_five(int arr[])
{
    bool result = false;
    for ( int &elem : arr )
        if ( elem == 5 )
        {
            result = true;
        }
    return result;
}
